// civl: batch driver and session server for the overlap-boosting workbench.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "civl/csv.hpp"
#include "civl/dataset.hpp"
#include "civl/error.hpp"
#include "civl/overlap.hpp"
#include "civl/rules.hpp"
#include "civl/scorers.hpp"
#include "civl/serialize.hpp"
#include "civl/service.hpp"
#include "civl/synth.hpp"

namespace fs = std::filesystem;
using namespace civl;

namespace {

struct Options {
  std::string data;
  std::string label = "class";
  std::vector<std::string> classes;
  bool normalize = false;
  std::uint64_t seed = 0;
  std::size_t min_coverage = 0;
  std::size_t max_iterations = 100;
  std::string weights = "2,1";
  std::string out;
  std::string scorer;
  std::string scores;
  double threshold = 0.0;
  std::string mode = "uniform_hb";
  std::size_t n = 25;
  std::string pure_class;
  std::size_t synth_n = 0;
  std::string host = "127.0.0.1";
  int port = -1;
};

Dataset load(const Options& o) {
  Dataset d = load_csv_file(o.data, o.label);
  // Normalize before selecting classes: bounds come from the whole file.
  if (o.normalize) d = minmax_normalize(d);
  if (!o.classes.empty()) d = select_classes(d, o.classes);
  if (d.empty()) throw Error("no cases left after class selection");
  return d;
}

std::pair<std::string, std::string> class_pair(const Options& o, const Dataset& d) {
  if (o.classes.size() == 2) return {o.classes[0], o.classes[1]};
  const auto cls = d.classes();
  if (o.classes.empty() && cls.size() == 2) return {cls[0], cls[1]};
  throw Error("this command needs exactly two classes (use --classes TOP,BOTTOM)");
}

OverlapWeights parse_weights(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw Error("--weights expects w1,w2");
  OverlapWeights w;
  if (!csv::parse_double(s.substr(0, comma), w.formerly_misclassified) ||
      !csv::parse_double(s.substr(comma + 1), w.other))
    throw Error("--weights expects two numbers, got '" + s + "'");
  return w;
}

LinearScorer first_scorer(const Options& o, const Dataset& d) {
  const auto [top, bottom] = class_pair(o, d);
  if (o.scorer.empty()) return train_fisher(d, top, bottom);
  std::ifstream in(o.scorer);
  if (!in) throw Error("cannot open '" + o.scorer + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(o.scorer + ": " + e.what());
  }
  LinearScorer f = j.contains("scorer") ? j.at("scorer").get<LinearScorer>() : j.get<LinearScorer>();
  if (f.coefficients.size() != d.dim())
    throw Error(o.scorer + ": scorer has " + std::to_string(f.coefficients.size()) +
                " coefficients, data has " + std::to_string(d.dim()) + " attributes");
  return f;
}

/// Writes to <out>/<name>, or to stdout when --out is not given.
void emit(const Options& o, const std::string& name, const std::string& content, bool to_stdout = true) {
  if (o.out.empty()) {
    if (to_stdout) std::cout << content;
    return;
  }
  fs::create_directories(o.out);
  const auto path = fs::path(o.out) / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  f << content;
}

struct Scored {
  LinearScorer f;
  ScoreVector scores;
  std::vector<CaseId> misclassified;
  OverlapInterval interval;
};

Scored score_and_overlap(const Options& o, const Dataset& d) {
  Scored s;
  s.f = first_scorer(o, d);
  s.scores = score_dataset(s.f, d);
  s.misclassified = find_misclassified(s.scores, d.labels(), s.f.cut());
  s.interval = compute_overlap_interval(s.scores, d.labels(), s.f.cut());
  return s;
}

std::set<CaseId> overlap_ids(const Scored& s) {
  std::set<CaseId> ids;
  for (std::size_t i = 0; i < s.scores.size(); ++i)
    if (s.interval.contains(s.scores.scores[i])) ids.insert(s.scores.case_ids[i]);
  return ids;
}

double accuracy_of(const std::vector<std::string>& pred, const Dataset& d) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < d.size(); ++i) ok += pred[i] == d.label(i);
  return static_cast<double>(ok) / static_cast<double>(d.size());
}

int cmd_train(const Options& o) {
  const Dataset d = load(o);
  const auto [top, bottom] = class_pair(o, d);
  const LinearScorer f = train_fisher(d, top, bottom);
  emit(o, "scorer.json", dump(Json(f)));
  std::ostringstream csv;
  write_scores_csv(csv, d, score_dataset(f, d));
  emit(o, "scores.csv", csv.str(), false);
  return 0;
}

int cmd_overlap(const Options& o) {
  const Dataset d = load(o);
  Json j;
  if (!o.scores.empty()) {
    const auto [top, bottom] = class_pair(o, d);
    const Cut cut{o.threshold, top, bottom};
    auto sv = import_scores_file(d, o.scores);
    const auto iv = compute_overlap_interval(sv, d.labels(), cut);
    const auto mis = find_misclassified(sv, d.labels(), cut);
    j = Json{{"cut", Json{{"threshold", cut.threshold}, {"top_class", top}, {"bottom_class", bottom}}},
             {"interval", iv},
             {"misclassified", mis},
             {"purity_violations", purity_violations(iv, sv, d.labels(), cut)}};
    if (!mis.empty()) {
      j["hyperblock"] = compute_overlap_hyperblock(d, mis);
      j["envelope"] = build_modified_envelope(d, mis, sort_attributes_by_correlation(d));
    }
  } else {
    const Scored s = score_and_overlap(o, d);
    j = Json{{"scorer", s.f},
             {"scorer_identity", scorer_identity(s.f)},
             {"interval", s.interval},
             {"misclassified", s.misclassified},
             {"purity_violations", purity_violations(s.interval, s.scores, d.labels(), s.f.cut())},
             {"hyperblock", nullptr},
             {"envelope", nullptr}};
    if (!s.misclassified.empty()) {
      const auto hb = compute_overlap_hyperblock(d, s.misclassified);
      std::vector<std::size_t> order(d.dim());
      std::iota(order.begin(), order.end(), std::size_t{0});
      j["hyperblock"] = hb;
      j["envelope"] = build_modified_envelope(d, s.misclassified, order);
      j["containment"] = check_linear_containment(s.f, hb, s.interval);
    }
  }
  emit(o, "overlap.json", dump(j));
  return 0;
}

int cmd_boost(const Options& o) {
  const Dataset d = load(o);
  const OverlapWeights w = parse_weights(o.weights);
  const Scored s = score_and_overlap(o, d);
  const auto ov_ids = overlap_ids(s);
  const std::set<CaseId> mis(s.misclassified.begin(), s.misclassified.end());

  std::vector<std::string> f1_pred;
  for (double v : s.scores.scores) f1_pred.push_back(s.f.cut().decide(v));
  Json report{{"f1_training_accuracy", accuracy_of(f1_pred, d)}};

  BoostedModel m;
  std::string source = "none";
  if (ov_ids.empty()) {
    m = compose_boosted(s.f, s.f, s.interval);
  } else {
    const Dataset ov = select_ids(d, ov_ids);
    const auto fit = train_weighted_overlap(ov, mis, w, s.f.top_class, s.f.bottom_class, s.f.coefficients);
    source = fit.source;
    m = compose_boosted(s.f, fit.scorer, s.interval);
    report["f1_overlap"] = evaluate_overlap(s.f, ov, s.interval, w, mis);
    const auto ov_pred = predict_boosted(m, ov);
    std::vector<double> ov_scores = score_dataset(s.f, ov).scores;
    report["boosted_overlap"] =
        evaluate_predictions(ov.labels(), ov_pred, ov.case_ids(), ov_scores, s.interval, w, mis);
  }
  const double acc = accuracy_of(predict_boosted(m, d), d);
  report["boosted_training_accuracy"] = acc;
  report["parameter_count"] = m.parameter_count();
  report["cases_per_parameter"] = static_cast<double>(d.size()) / static_cast<double>(m.parameter_count());
  report["f2_source"] = source;
  report["weights"] = {w.formerly_misclassified, w.other};
  emit(o, "boost.json", dump(Json{{"model", m}, {"report", report}}));
  return 0;
}

int cmd_dnc(const Options& o) {
  const Dataset d = load(o);
  DncOptions opt;
  if (o.min_coverage > 0) opt.min_coverage = o.min_coverage;
  opt.max_iterations = o.max_iterations;
  const DncResult r = dnc_run(d, opt);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < d.size(); ++i) ok += r.list.classify(d.row(i)) == d.label(i);
  const std::string text = render_rules(r.list) + "\nGeneralized decision tree\n" +
                           to_generalized_dt(r.list).render();
  if (o.out.empty()) {
    std::cout << text;
  } else {
    emit(o, "decision_list.json", dump(Json(r.list)));
    emit(o, "rules.txt", text);
    emit(o, "dnc_summary.json",
         dump(Json{{"min_coverage", r.min_coverage},
                   {"iterations", r.list.iterations()},
                   {"rules", r.list.rules.size()},
                   {"leftovers", r.leftovers},
                   {"training_accuracy", static_cast<double>(ok) / static_cast<double>(d.size())}}));
  }
  return 0;
}

SyntheticBatch make_batch(const Options& o, const Dataset& d, const Scored& s, SynthMode mode,
                          std::size_t n) {
  if (mode == SynthMode::marginal_pure) {
    const std::string cls = o.pure_class.empty() ? s.f.top_class : o.pure_class;
    std::set<CaseId> members;
    for (std::size_t i = 0; i < d.size(); ++i)
      if (d.label(i) == cls && !s.interval.contains(s.scores.scores[i])) members.insert(d.case_id(i));
    if (members.empty()) throw Error("class '" + cls + "' has no cases outside the overlap interval");
    return generate_synthetic(MarginalRegion::from_cases(d, members), n, o.seed);
  }
  if (s.misclassified.empty()) throw Error("the scorer has no misclassified cases; the overlap area is empty");
  return generate_synthetic(compute_overlap_hyperblock(d, s.misclassified), mode, n, o.seed, d.attributes());
}

int cmd_synth(const Options& o) {
  const Dataset d = load(o);
  const Scored s = score_and_overlap(o, d);
  const SyntheticBatch b = make_batch(o, d, s, synth_mode_from_string(o.mode), o.n);
  std::ostringstream csv;
  write_batch_csv(csv, b);
  emit(o, "synth.csv", csv.str());
  return 0;
}

int cmd_eval(const Options& o) {
  const Dataset d = load(o);
  Json j;
  if (!o.scores.empty()) {
    const auto [top, bottom] = class_pair(o, d);
    const Cut cut{o.threshold, top, bottom};
    const auto sv = import_scores_file(d, o.scores);
    const auto iv = compute_overlap_interval(sv, d.labels(), cut);
    std::set<CaseId> ids;
    for (std::size_t i = 0; i < sv.size(); ++i)
      if (iv.contains(sv.scores[i])) ids.insert(sv.case_ids[i]);
    if (ids.empty()) throw Error("the imported scores have an empty overlap interval");
    j = Json{{"interval", iv}, {"overlap", evaluate_overlap(sv, cut, select_ids(d, ids), iv)}};
  } else {
    const OverlapWeights w = parse_weights(o.weights);
    const Scored s = score_and_overlap(o, d);
    const auto ids = overlap_ids(s);
    const std::set<CaseId> mis(s.misclassified.begin(), s.misclassified.end());
    j = Json{{"scorer_identity", scorer_identity(s.f)},
             {"interval", s.interval},
             {"whole_data", evaluate_overlap(s.f, d, s.interval, w, mis)},
             {"overlap", ids.empty() ? Json(nullptr) : Json(evaluate_overlap(s.f, select_ids(d, ids), s.interval, w, mis))}};
    if (o.synth_n > 0 && !s.interval.empty) {
      const auto drawn = make_batch(o, d, s, SynthMode::marginal_pure, o.synth_n);
      const auto hb = compute_overlap_hyperblock(d, s.misclassified);
      // Marginal draws can land inside the overlap block; those are not pure-area evidence.
      const auto b = drop_inside(drawn, hb);
      const auto ev = pure_area_evidence(s.f, b, s.interval, &hb);
      const double real = static_cast<double>(ids.size()) / static_cast<double>(d.size());
      const auto ratio = hit_rate_discrepancy(real, ev.fraction);
      j["pure_area_evidence"] = ev;
      j["pure_area_batch"] = batch_meta_json(drawn);
      j["pure_area_batch"]["dropped_inside_overlap_block"] = drawn.size() - b.size();
      j["real_hit_fraction"] = real;
      j["hit_rate_discrepancy"] = ratio ? Json(*ratio) : Json(nullptr);
    }
  }
  emit(o, "eval.json", dump(j));
  return 0;
}

int cmd_serve(const Options& o) {
  Service svc;
  const int port = svc.bind(o.host, o.port >= 0 ? o.port : port_from_env(8080));
  if (port < 0) throw Error("cannot bind " + o.host);
  std::cout << "listening on http://" << o.host << ":" << port << std::endl;
  return svc.serve() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Overlap-area boosting and Divide-and-Classify workbench"};
  app.require_subcommand(1);
  Options o;

  auto data_flags = [&](CLI::App* c, bool two_class) {
    c->add_option("--data", o.data, "CSV file with a header row")->required()->check(CLI::ExistingFile);
    c->add_option("--label", o.label, "Class label column")->capture_default_str();
    c->add_option("--classes", o.classes, two_class ? "TOP,BOTTOM classes" : "Classes to keep")
        ->delimiter(',');
    c->add_flag("--normalize", o.normalize, "Min-max normalize attributes");
    c->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    c->add_option("--out", o.out, "Output directory (default: stdout)");
  };
  auto scorer_flag = [&](CLI::App* c) {
    c->add_option("--scorer", o.scorer, "Scorer JSON to use instead of training one");
  };

  auto* train = app.add_subcommand("train", "Fit a Fisher scorer; writes scorer.json and scores.csv");
  data_flags(train, true);

  auto* overlap = app.add_subcommand("overlap", "Overlap interval, hyperblock and envelope");
  data_flags(overlap, true);
  scorer_flag(overlap);
  overlap->add_option("--scores", o.scores, "Imported scores CSV (case_id,score)");
  overlap->add_option("--threshold", o.threshold, "Threshold for imported scores");

  auto* boost = app.add_subcommand("boost", "Boosted model with an overlap-area scorer");
  data_flags(boost, true);
  scorer_flag(boost);
  boost->add_option("--weights", o.weights, "w1,w2 for formerly misclassified and other cases")
      ->capture_default_str();

  auto* dnc = app.add_subcommand("dnc", "Automatic Divide-and-Classify");
  data_flags(dnc, false);
  dnc->add_option("--min-coverage", o.min_coverage, "Smallest pure interval kept (default: max(3, 5% of smallest class))");
  dnc->add_option("--max-iterations", o.max_iterations)->capture_default_str();

  auto* synth = app.add_subcommand("synth", "Seeded synthetic cases");
  data_flags(synth, true);
  scorer_flag(synth);
  synth->add_option("--mode", o.mode, "uniform_hb | gaussian_center | marginal_pure")->capture_default_str();
  synth->add_option("--n", o.n, "Number of cases")->capture_default_str();
  synth->add_option("--pure-class", o.pure_class, "Class whose pure area feeds marginal_pure");

  auto* eval = app.add_subcommand("eval", "Overlap-area evaluation report");
  data_flags(eval, true);
  scorer_flag(eval);
  eval->add_option("--weights", o.weights)->capture_default_str();
  eval->add_option("--scores", o.scores, "Imported scores CSV (case_id,score)");
  eval->add_option("--threshold", o.threshold, "Threshold for imported scores");
  eval->add_option("--synth-n", o.synth_n, "Also run the pure-area evidence test with this many cases");
  eval->add_option("--pure-class", o.pure_class);

  auto* serve = app.add_subcommand("serve", "Start the session service (port from OVERLAP_BOOST_PORT)");
  serve->add_option("--host", o.host)->capture_default_str();
  serve->add_option("--port", o.port, "Overrides OVERLAP_BOOST_PORT");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*train) return cmd_train(o);
    if (*overlap) return cmd_overlap(o);
    if (*boost) return cmd_boost(o);
    if (*dnc) return cmd_dnc(o);
    if (*synth) return cmd_synth(o);
    if (*eval) return cmd_eval(o);
    if (*serve) return cmd_serve(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
