#include "lesionkit/classify.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "json.hpp"

#include "lesionkit/random.hpp"

namespace lesion::classify {
namespace {

using nlohmann::json;

double quantile_sorted(const std::vector<double>& v, double q) {
  return v[static_cast<std::size_t>(std::floor(q * static_cast<double>(v.size() - 1)))];
}

std::vector<std::size_t> resolve_filter(const TypeFilter& filter) {
  std::vector<std::size_t> types = filter;
  if (types.empty())
    for (std::size_t t = 0; t < desc::schema().size(); ++t) types.push_back(t);
  std::sort(types.begin(), types.end());
  types.erase(std::unique(types.begin(), types.end()), types.end());
  for (const std::size_t t : types)
    if (t >= desc::schema().size()) throw SchemaError("descriptor type filter out of range");
  return types;
}

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd json_vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json mat_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(row);
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

Eigen::MatrixXd json_mat(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>(), cols = j.at("cols").get<Eigen::Index>();
  Eigen::MatrixXd m(rows, cols);
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows) throw SchemaError("matrix row count mismatch");
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto row = data[static_cast<std::size_t>(r)].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != cols) throw SchemaError("matrix column count mismatch");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

Eigen::MatrixXd feature_matrix(const std::vector<const desc::DescriptorBundle*>& bundles,
                               const std::vector<std::size_t>& rows, const std::vector<Edges>& edges,
                               const TypeFilter& filter) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(feature_length(filter)));
  for (std::size_t i = 0; i < rows.size(); ++i)
    x.row(static_cast<Eigen::Index>(i)) = featurize(*bundles[rows[i]], edges, filter).transpose();
  return x;
}

Confusion empty_confusion(int classes) {
  return Confusion(static_cast<std::size_t>(classes), std::vector<long long>(static_cast<std::size_t>(classes), 0));
}

std::vector<int> folds_for(const std::vector<int>& labels, int classes, const CvOptions& opts) {
  if (opts.fold_of) {
    if (opts.fold_of->size() != labels.size()) throw DataError("fold assignment length differs from the sample count");
    return *opts.fold_of;
  }
  return stratified_folds(labels, classes, opts.folds, opts.seed);
}

int fold_count(const std::vector<int>& fold_of) {
  int k = 0;
  for (const int f : fold_of) k = std::max(k, f + 1);
  return k;
}

}  // namespace

std::array<double, kBins> attribute_histogram(std::span<const double> values, const Edges& edges) {
  for (int i = 0; i < kBins; ++i)
    if (!(edges[static_cast<std::size_t>(i)] < edges[static_cast<std::size_t>(i) + 1]))
      throw DataError("histogram edges must be strictly increasing");
  std::array<double, kBins> h{};
  if (values.empty()) return h;
  for (const double v : values) {
    const auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, v);
    h[static_cast<std::size_t>(it - (edges.begin() + 1))] += 1.0;
  }
  for (double& c : h) c /= static_cast<double>(values.size());
  return h;
}

std::vector<Edges> learn_edges(const std::vector<const desc::DescriptorBundle*>& training) {
  const auto& sch = desc::schema();
  std::vector<Edges> out;
  for (std::size_t t = 0; t < sch.size(); ++t)
    for (int j = 0; j < sch[t].arity; ++j) {
      std::vector<double> vals;
      for (const auto* b : training)
        for (const auto& row : b->lists[t]) vals.push_back(row[static_cast<std::size_t>(j)]);
      double lo = 0.0, hi = 1.0;
      if (!vals.empty()) {
        std::sort(vals.begin(), vals.end());
        lo = quantile_sorted(vals, 0.01);
        hi = quantile_sorted(vals, 0.99);
      }
      if (!(hi - lo > 1e-9 * std::max(1.0, std::abs(lo)))) {
        const double pad = std::max(0.5, 1e-6 * std::abs(lo));
        lo -= pad;
        hi += pad;
      }
      Edges e;
      for (int i = 0; i <= kBins; ++i) e[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / kBins;
      e[kBins] = hi;
      out.push_back(e);
    }
  return out;
}

std::size_t feature_length(const TypeFilter& filter) {
  std::size_t n = 0;
  for (const std::size_t t : resolve_filter(filter)) n += static_cast<std::size_t>(desc::schema()[t].arity) * kBins;
  return n;
}

Eigen::VectorXd featurize(const desc::DescriptorBundle& bundle, const std::vector<Edges>& edges,
                          const TypeFilter& filter) {
  const auto& sch = desc::schema();
  if (bundle.lists.size() != sch.size()) throw SchemaError("descriptor bundle does not match the schema");
  if (static_cast<int>(edges.size()) != desc::attribute_count()) throw SchemaError("bin edge count does not match the schema");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(feature_length(filter)));
  Eigen::Index pos = 0;
  std::vector<double> vals;
  for (const std::size_t t : resolve_filter(filter)) {
    const int offset = desc::attribute_offset(t);
    for (int j = 0; j < sch[t].arity; ++j) {
      vals.clear();
      for (const auto& row : bundle.lists[t]) {
        if (static_cast<int>(row.size()) != sch[t].arity) throw SchemaError("descriptor row arity mismatch");
        vals.push_back(row[static_cast<std::size_t>(j)]);
      }
      const auto h = attribute_histogram(vals, edges[static_cast<std::size_t>(offset + j)]);
      for (int i = 0; i < kBins; ++i) v[pos++] = h[static_cast<std::size_t>(i)];
    }
  }
  return v;
}

FeatureModel fit_features(const Eigen::MatrixXd& x, const std::vector<int>& labels, int classes,
                          const FitOptions& opts) {
  const Eigen::Index n = x.rows(), d = x.cols();
  if (static_cast<Eigen::Index>(labels.size()) != n) throw DataError("label count differs from the sample count");
  std::vector<int> count(static_cast<std::size_t>(classes), 0);
  for (const int l : labels) {
    if (l < 0 || l >= classes) throw DataError("label out of range");
    ++count[static_cast<std::size_t>(l)];
  }
  int present = 0;
  for (int c = 0; c < classes; ++c) {
    if (count[static_cast<std::size_t>(c)] == 1)
      throw InsufficientClassDataError("class " + std::to_string(c) + " has a single training sample");
    if (count[static_cast<std::size_t>(c)] > 0) ++present;
  }
  if (present < 2) throw InsufficientClassDataError("training data holds fewer than two classes");

  FeatureModel m;
  m.classes = classes;
  m.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd xc = x.rowwise() - m.mean.transpose();
  const double nd = static_cast<double>(n);

  const bool gram = n < d;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram ? Eigen::MatrixXd(xc * xc.transpose() / nd)
                                                         : Eigen::MatrixXd(xc.transpose() * xc / nd));
  const Eigen::VectorXd& ev = es.eigenvalues();  // ascending
  const Eigen::Index dim = ev.size();
  const double top = dim > 0 ? ev[dim - 1] : 0.0;
  int rank = 0;
  for (Eigen::Index i = dim - 1; i >= 0 && top > 0.0 && ev[i] > 1e-10 * top; --i) ++rank;
  int wanted = opts.components > 0 ? opts.components : std::min<int>(64, static_cast<int>(n) - present);
  wanted = std::max(1, wanted);
  const int p = std::min(wanted, rank);

  m.basis.resize(d, p);
  m.eigenvalues.resize(p);
  for (int i = 0; i < p; ++i) {
    const Eigen::Index src = dim - 1 - i;
    Eigen::VectorXd u = gram ? Eigen::VectorXd(xc.transpose() * es.eigenvectors().col(src)) : Eigen::VectorXd(es.eigenvectors().col(src));
    u.normalize();
    Eigen::Index arg = 0;
    u.cwiseAbs().maxCoeff(&arg);
    if (u[arg] < 0.0) u = -u;
    m.basis.col(i) = u;
    m.eigenvalues[i] = ev[src];
  }

  const Eigen::MatrixXd z = xc * m.basis;
  m.class_means = Eigen::MatrixXd::Zero(classes, p);
  for (Eigen::Index i = 0; i < n; ++i) m.class_means.row(labels[static_cast<std::size_t>(i)]) += z.row(i);
  m.present.assign(static_cast<std::size_t>(classes), false);
  for (int c = 0; c < classes; ++c)
    if (count[static_cast<std::size_t>(c)] > 0) {
      m.class_means.row(c) /= count[static_cast<std::size_t>(c)];
      m.present[static_cast<std::size_t>(c)] = true;
    }
  Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd r = (z.row(i) - m.class_means.row(labels[static_cast<std::size_t>(i)])).transpose();
    sw += r * r.transpose();
  }
  sw /= nd;
  if (p > 0) {
    const double tr = sw.trace();
    sw.diagonal().array() += tr > 0.0 ? 1e-6 * tr / p : 1e-12;
  }
  m.weights = Eigen::MatrixXd::Zero(p, classes);
  m.bias = Eigen::VectorXd::Constant(classes, -1e300);
  const Eigen::LDLT<Eigen::MatrixXd> solver(sw);
  for (int c = 0; c < classes; ++c) {
    if (!m.present[static_cast<std::size_t>(c)]) continue;
    const double prior = opts.equal_priors ? 1.0 / present : count[static_cast<std::size_t>(c)] / nd;
    const Eigen::VectorXd mc = m.class_means.row(c).transpose();
    const Eigen::VectorXd w = p > 0 ? Eigen::VectorXd(solver.solve(mc)) : Eigen::VectorXd(0);
    m.weights.col(c) = w;
    m.bias[c] = -0.5 * mc.dot(w) + std::log(prior);
  }
  return m;
}

Prediction predict_features(const FeatureModel& m, const Eigen::VectorXd& v) {
  if (v.size() != m.mean.size()) throw SchemaError("feature vector length does not match the model");
  const Eigen::VectorXd z = m.basis.transpose() * (v - m.mean);
  const Eigen::VectorXd s = m.weights.transpose() * z + m.bias;
  Prediction p;
  p.scores.assign(s.data(), s.data() + s.size());
  double best = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < m.classes; ++c)
    if (m.present[static_cast<std::size_t>(c)] && s[c] > best) {
      best = s[c];
      p.label = c;
    }
  return p;
}

std::string TrainedModel::to_json() const {
  json j;
  j["schema"] = schema_version;
  j["labels"] = labels;
  j["type_filter"] = filter;
  json e = json::array();
  for (const auto& ed : edges) e.push_back(std::vector<double>(ed.begin(), ed.end()));
  j["edges"] = e;
  j["classes"] = model.classes;
  j["pca_mean"] = vec_json(model.mean);
  j["pca_basis"] = mat_json(model.basis);
  j["pca_eigenvalues"] = vec_json(model.eigenvalues);
  j["lda_class_means"] = mat_json(model.class_means);
  j["lda_weights"] = mat_json(model.weights);
  j["lda_bias"] = vec_json(model.bias);
  j["present"] = model.present;
  return j.dump(1);
}

TrainedModel TrainedModel::from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    TrainedModel t;
    t.schema_version = j.at("schema").get<std::string>();
    if (t.schema_version != desc::kSchemaVersion)
      throw SchemaError("model schema '" + t.schema_version + "' is not supported");
    t.labels = j.at("labels").get<std::vector<std::string>>();
    t.filter = j.at("type_filter").get<TypeFilter>();
    for (const auto& e : j.at("edges")) {
      const auto v = e.get<std::vector<double>>();
      if (v.size() != kBins + 1) throw SchemaError("bin edge list must hold 13 values");
      Edges ed;
      std::copy(v.begin(), v.end(), ed.begin());
      t.edges.push_back(ed);
    }
    if (static_cast<int>(t.edges.size()) != desc::attribute_count()) throw SchemaError("bin edge count does not match the schema");
    t.model.classes = j.at("classes").get<int>();
    t.model.mean = json_vec(j.at("pca_mean"));
    t.model.basis = json_mat(j.at("pca_basis"));
    t.model.eigenvalues = json_vec(j.at("pca_eigenvalues"));
    t.model.class_means = json_mat(j.at("lda_class_means"));
    t.model.weights = json_mat(j.at("lda_weights"));
    t.model.bias = json_vec(j.at("lda_bias"));
    t.model.present = j.at("present").get<std::vector<bool>>();
    const auto cls = static_cast<Eigen::Index>(t.model.classes);
    if (static_cast<std::size_t>(t.model.mean.size()) != feature_length(t.filter) ||
        t.model.basis.rows() != t.model.mean.size() || t.model.weights.rows() != t.model.basis.cols() ||
        t.model.weights.cols() != cls || t.model.bias.size() != cls || t.model.present.size() != static_cast<std::size_t>(cls) ||
        t.labels.size() != static_cast<std::size_t>(cls))
      throw SchemaError("model dimensions are inconsistent");
    return t;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed model file: ") + e.what());
  }
}

TrainedModel fit(const std::vector<const desc::DescriptorBundle*>& bundles, const std::vector<int>& labels,
                 const std::vector<std::string>& class_names, const FitOptions& opts, const TypeFilter& filter) {
  TrainedModel t;
  t.schema_version = std::string(desc::kSchemaVersion);
  t.labels = class_names;
  t.filter = resolve_filter(filter);
  t.edges = learn_edges(bundles);
  std::vector<std::size_t> rows(bundles.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  t.model = fit_features(feature_matrix(bundles, rows, t.edges, t.filter), labels,
                         static_cast<int>(class_names.size()), opts);
  return t;
}

Prediction predict(const TrainedModel& m, const Eigen::VectorXd& v) { return predict_features(m.model, v); }

Prediction predict(const TrainedModel& m, const desc::DescriptorBundle& bundle) {
  return predict_features(m.model, featurize(bundle, m.edges, m.filter));
}

std::vector<int> stratified_folds(const std::vector<int>& labels, int classes, int folds, std::uint64_t seed) {
  if (folds < 2) throw DataError("cross-validation needs at least two folds");
  std::vector<int> fold_of(labels.size(), 0);
  int offset = 0;
  for (int c = 0; c < classes; ++c) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) idx.push_back(i);
    if (idx.empty()) continue;
    if (static_cast<int>(idx.size()) < folds)
      throw InsufficientClassDataError("class " + std::to_string(c) + " has " + std::to_string(idx.size()) +
                                       " samples for " + std::to_string(folds) + " folds");
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.index(i)]);
    for (std::size_t i = 0; i < idx.size(); ++i) fold_of[idx[i]] = (offset + static_cast<int>(i)) % folds;
    offset += static_cast<int>(idx.size());
  }
  return fold_of;
}

CvResult cross_validate(const std::vector<const desc::DescriptorBundle*>& bundles, const std::vector<int>& labels,
                        const std::vector<std::string>& class_names, const CvOptions& opts) {
  const int classes = static_cast<int>(class_names.size());
  if (bundles.size() != labels.size()) throw DataError("label count differs from the sample count");
  CvResult res;
  res.fold_of = folds_for(labels, classes, opts);
  const int k = fold_count(res.fold_of);
  res.confusion = empty_confusion(classes);
  res.predictions.assign(labels.size(), -1);
  res.fold_models.resize(static_cast<std::size_t>(k));

  std::vector<std::future<void>> jobs;
  for (int f = 0; f < k; ++f)
    jobs.push_back(std::async(std::launch::async, [&, f] {
      std::vector<const desc::DescriptorBundle*> train;
      std::vector<int> train_labels;
      for (std::size_t i = 0; i < bundles.size(); ++i)
        if (res.fold_of[i] != f) {
          train.push_back(bundles[i]);
          train_labels.push_back(labels[i]);
        }
      TrainedModel model = fit(train, train_labels, class_names, opts.fit, opts.filter);
      for (std::size_t i = 0; i < bundles.size(); ++i)
        if (res.fold_of[i] == f) res.predictions[i] = predict(model, *bundles[i]).label;
      res.fold_models[static_cast<std::size_t>(f)] = std::move(model);
    }));
  for (auto& j : jobs) j.get();

  long long correct = 0, total = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (res.predictions[i] < 0) continue;
    ++res.confusion[static_cast<std::size_t>(labels[i])][static_cast<std::size_t>(res.predictions[i])];
    correct += res.predictions[i] == labels[i];
    ++total;
  }
  res.accuracy = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  return res;
}

FeatureCvResult cross_validate_features(const Eigen::MatrixXd& x, const std::vector<int>& labels, int classes,
                                        const CvOptions& opts) {
  const std::vector<int> fold_of = folds_for(labels, classes, opts);
  const int k = fold_count(fold_of);
  FeatureCvResult res;
  res.confusion = empty_confusion(classes);
  res.predictions.assign(labels.size(), -1);
  for (int f = 0; f < k; ++f) {
    std::vector<Eigen::Index> train;
    std::vector<int> train_labels;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (fold_of[i] != f) {
        train.push_back(static_cast<Eigen::Index>(i));
        train_labels.push_back(labels[i]);
      }
    Eigen::MatrixXd xt(static_cast<Eigen::Index>(train.size()), x.cols());
    for (std::size_t r = 0; r < train.size(); ++r) xt.row(static_cast<Eigen::Index>(r)) = x.row(train[r]);
    const FeatureModel m = fit_features(xt, train_labels, classes, opts.fit);
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (fold_of[i] == f) res.predictions[i] = predict_features(m, x.row(static_cast<Eigen::Index>(i)).transpose()).label;
  }
  long long correct = 0, total = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (res.predictions[i] < 0) continue;
    ++res.confusion[static_cast<std::size_t>(labels[i])][static_cast<std::size_t>(res.predictions[i])];
    correct += res.predictions[i] == labels[i];
    ++total;
  }
  res.accuracy = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  return res;
}

std::vector<TypeAccuracy> per_type_accuracy(const std::vector<const desc::DescriptorBundle*>& bundles,
                                            const std::vector<int>& labels,
                                            const std::vector<std::string>& class_names, const CvOptions& opts) {
  std::vector<TypeAccuracy> out;
  for (std::size_t t = 0; t < desc::schema().size(); ++t) {
    CvOptions o = opts;
    o.filter = {t};
    out.push_back({std::string(desc::schema()[t].name), cross_validate(bundles, labels, class_names, o).accuracy});
  }
  return out;
}

double reconstruction_error(const FeatureModel& m, const Eigen::MatrixXd& x, int p) {
  p = std::clamp(p, 0, m.components());
  const Eigen::MatrixXd xc = x.rowwise() - m.mean.transpose();
  const Eigen::MatrixXd b = m.basis.leftCols(p);
  return (xc - xc * b * b.transpose()).squaredNorm();
}

}  // namespace lesion::classify
