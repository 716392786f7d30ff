#include <string>
#include <vector>

#include "lesionkit/cli.hpp"

int main(int argc, char** argv) {
  return lesion::cli::run_command(std::vector<std::string>(argv, argv + argc));
}
