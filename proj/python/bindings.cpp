#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <tuple>

#include "lmcot/cli.hpp"
#include "lmcot/detect.hpp"
#include "lmcot/errors.hpp"
#include "lmcot/gallery.hpp"
#include "lmcot/gradcheck.hpp"
#include "lmcot/losses.hpp"
#include "lmcot/metrics.hpp"
#include "lmcot/train.hpp"

namespace py = pybind11;
using namespace lmcot;

namespace {

py::dict loss_dict(const LossOutput& out) {
  py::dict d;
  d["value"] = out.value;
  d["grad"] = out.grad;
  d["per_sample"] = out.per_sample;
  return d;
}

ScoredPairs pairs(std::vector<double> genuine, std::vector<double> impostor) {
  return {std::move(genuine), std::move(impostor)};
}

LogBase parse_base(const std::string& name) {
  if (name == "natural") return LogBase::natural;
  if (name == "ten") return LogBase::ten;
  throw InputError("log_base must be 'natural' or 'ten'");
}

}  // namespace

PYBIND11_MODULE(_lmcot, m) {
  m.doc() = "Bindings for the lmcot C++ library";

  // Later registrations are tried first, so the base class goes first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<LossConfig>(m, "LossConfig")
      .def(py::init<>())
      .def_readwrite("s", &LossConfig::s)
      .def_readwrite("m", &LossConfig::m)
      .def_readwrite("m1", &LossConfig::m1)
      .def_readwrite("m2", &LossConfig::m2)
      .def_readwrite("m3", &LossConfig::m3)
      .def_readwrite("sigma1", &LossConfig::sigma1)
      .def_readwrite("sigma2", &LossConfig::sigma2)
      .def_readwrite("sigma3", &LossConfig::sigma3)
      .def_readwrite("alpha", &LossConfig::alpha)
      .def_readwrite("beta", &LossConfig::beta)
      .def_readwrite("eps", &LossConfig::eps)
      .def_property(
          "log_base", [](const LossConfig& c) { return c.log_base == LogBase::ten ? "ten" : "natural"; },
          [](LossConfig& c, const std::string& v) { c.log_base = parse_base(v); })
      .def_property(
          "cot_path", [](const LossConfig& c) { return c.cot_path == CotPath::identity ? "identity" : "angle"; },
          [](LossConfig& c, const std::string& v) {
            if (v != "angle" && v != "identity") throw InputError("cot_path must be 'angle' or 'identity'");
            c.cot_path = v == "identity" ? CotPath::identity : CotPath::angle;
          });

  m.def("loss_names", [] {
    std::vector<std::string> names;
    for (AngularLoss k : all_angular_losses()) names.emplace_back(to_string(k));
    return names;
  });

  m.def(
      "angular_loss",
      [](const std::string& name, const Eigen::MatrixXd& theta, const std::vector<int>& labels,
         const LossConfig& cfg, std::uint64_t seed) {
        Rng rng(seed);
        return loss_dict(angular_loss(parse_angular_loss(name), AngularBatch{theta, labels}, cfg, rng));
      },
      py::arg("name"), py::arg("theta"), py::arg("labels"), py::arg("config") = LossConfig{},
      py::arg("seed") = 0, "Angular loss, its gradient with respect to theta and per-sample values.");

  m.def(
      "softmax_loss",
      [](const Eigen::MatrixXd& logits, const std::vector<int>& labels, const std::string& base) {
        return loss_dict(softmax_loss(logits, labels, parse_base(base)));
      },
      py::arg("logits"), py::arg("labels"), py::arg("log_base") = "natural");

  m.def(
      "double_loss",
      [](const Eigen::VectorXd& low, const Eigen::VectorXd& high) {
        const DoubleLossOutput out = double_loss({low, high});
        return std::make_tuple(out.value, out.grad_low, out.grad_high);
      },
      py::arg("low_scores"), py::arg("high_scores"));

  m.def(
      "margin_sigmoid_ce",
      [](const Eigen::VectorXd& scores, const std::vector<int>& labels, double margin, bool negate) {
        return loss_dict(margin_sigmoid_ce(scores, labels, margin, negate));
      },
      py::arg("scores"), py::arg("labels"), py::arg("m"), py::arg("negate_margin") = false);

  m.def(
      "cot_via_theta",
      [](double theta, double margin, double eps) {
        const CotPair p = cot_via_theta(theta, margin, eps);
        return std::make_pair(p.cot_theta, p.cot_theta_m);
      },
      py::arg("theta"), py::arg("m"), py::arg("eps") = 1e-7);
  m.def(
      "cot_via_identity",
      [](double cos_theta, double margin, double eps) {
        const CotPair p = cot_via_identity(cos_theta, margin, eps);
        return std::make_pair(p.cot_theta, p.cot_theta_m);
      },
      py::arg("cos_theta"), py::arg("m"), py::arg("eps") = 1e-7);
  m.def("angles_from_features", &angles_from_features, py::arg("features"), py::arg("class_weights"),
        py::arg("eps") = 1e-7);

  m.def(
      "eer",
      [](std::vector<double> g, std::vector<double> i) {
        const EerResult r = eer(pairs(std::move(g), std::move(i)));
        return std::make_pair(r.eer, r.threshold);
      },
      py::arg("genuine"), py::arg("impostor"), "(eer, threshold) of similarity scores.");
  m.def(
      "auc", [](std::vector<double> g, std::vector<double> i) { return auc(pairs(std::move(g), std::move(i))); },
      py::arg("genuine"), py::arg("impostor"));
  m.def(
      "far_frr_sweep",
      [](std::vector<double> g, std::vector<double> i, const std::vector<double>& thresholds) {
        std::vector<std::tuple<double, double, double>> rows;
        for (const SweepPoint& p : far_frr_sweep(pairs(std::move(g), std::move(i)), thresholds))
          rows.emplace_back(p.threshold, p.far, p.frr);
        return rows;
      },
      py::arg("genuine"), py::arg("impostor"), py::arg("thresholds"));
  m.def(
      "map_at_100",
      [](const std::vector<std::pair<std::vector<bool>, std::size_t>>& queries) {
        std::vector<RankedQuery> q;
        for (const auto& [rel, count] : queries) q.push_back({rel, count});
        return map_at_100(q);
      },
      py::arg("queries"), "queries: list of (relevance flags best first, number of relevant items).");
  m.def(
      "gap",
      [](const std::vector<std::pair<double, bool>>& preds, std::size_t queries) {
        std::vector<Prediction> p;
        for (const auto& [conf, ok] : preds) p.push_back({conf, ok});
        return gap(p, queries);
      },
      py::arg("predictions"), py::arg("in_gallery_queries"));
  m.def(
      "pca2", [](const Eigen::MatrixXd& data) { return pca2(data); }, py::arg("data"));

  py::class_<DetectionBox>(m, "Box")
      .def(py::init([](double x1, double y1, double x2, double y2, double confidence) {
             DetectionBox b;
             b.x1 = x1, b.y1 = y1, b.x2 = x2, b.y2 = y2, b.confidence = confidence;
             return b;
           }),
           py::arg("x1"), py::arg("y1"), py::arg("x2"), py::arg("y2"), py::arg("confidence") = 1.0)
      .def_readwrite("x1", &DetectionBox::x1)
      .def_readwrite("y1", &DetectionBox::y1)
      .def_readwrite("x2", &DetectionBox::x2)
      .def_readwrite("y2", &DetectionBox::y2)
      .def_readwrite("confidence", &DetectionBox::confidence)
      .def("__repr__", [](const DetectionBox& b) {
        std::ostringstream s;
        s << "Box(" << b.x1 << ", " << b.y1 << ", " << b.x2 << ", " << b.y2 << ", " << b.confidence << ")";
        return s.str();
      });
  m.def("iou", &iou);
  m.def("nms", &nms, py::arg("boxes"), py::arg("iou_threshold"));

  py::class_<Gallery>(m, "Gallery")
      .def(py::init<Eigen::Index>(), py::arg("dim"))
      .def(
          "enroll",
          [](Gallery& g, const std::string& name, const Eigen::VectorXd& e, bool sharp, std::int64_t ts) {
            return std::string(to_string(g.enroll(name, e, sharp, ts)));
          },
          py::arg("name"), py::arg("embedding"), py::arg("sharp") = true, py::arg("timestamp") = 0)
      .def(
          "match",
          [](const Gallery& g, const Eigen::VectorXd& probe, double threshold) {
            const MatchResult r = g.match(probe, threshold);
            return std::make_pair(r.identity, r.best_similarity);
          },
          py::arg("probe"), py::arg("threshold") = 0.5)
      .def("count", [](const Gallery& g, const std::string& name) {
        const Identity* id = g.find(name);
        return id ? id->embeddings.size() : std::size_t{0};
      })
      .def_property_readonly("dim", &Gallery::dim)
      .def("dumps", [](const Gallery& g) {
        std::ostringstream out;
        g.save(out);
        return out.str();
      })
      .def_static("loads", [](const std::string& text) {
        std::istringstream in(text);
        return Gallery::load(in);
      })
      .def("__eq__", [](const Gallery& a, const Gallery& b) { return a == b; });

  m.def("check_examples", [](double tolerance) {
    py::list rows;
    for (const ExampleCheck& c : check_examples(tolerance)) {
      py::dict d;
      d["loss"] = c.loss;
      d["expected"] = c.expected;
      d["computed"] = c.computed;
      d["terms"] = c.terms;
      d["pass"] = c.pass;
      rows.append(d);
    }
    return rows;
  }, py::arg("tolerance") = 1e-3);

  m.def(
      "gradcheck",
      [](const std::string& loss, int trials, double h, std::uint64_t seed) {
        return gradcheck(loss, trials, h, seed).max_rel_error;
      },
      py::arg("loss"), py::arg("trials") = 100, py::arg("h") = 1e-5, py::arg("seed") = 0,
      "Largest relative error between analytic and central-difference gradients.");

  m.def(
      "train",
      [](const std::string& loss, int steps, double lr, std::uint64_t seed, std::uint64_t data_seed,
         double spread, const LossConfig& cfg) {
        TrainConfig tc;
        tc.steps = steps;
        tc.lr = lr;
        tc.seed = seed;
        tc.data.seed = data_seed;
        tc.data.intra_spread = spread;
        tc.loss_cfg = cfg;
        if (loss == "margin-ce" || loss == "double+margin-ce") {
          tc.regime = loss == "margin-ce" ? TrainRegime::margin_ce : TrainRegime::margin_ce_double;
          tc.data.task = SynthTask::binary_live_spoof;
        } else {
          tc.loss = parse_angular_loss(loss);
        }
        const TrainReport r = train_loop(tc);
        py::dict d;
        d["metric"] = r.metric;
        d["initial"] = r.metric_initial;
        d["final"] = r.metric_final;
        d["loss_curve"] = r.loss_curve;
        return d;
      },
      py::arg("loss") = "lmcot", py::arg("steps") = 500, py::arg("lr") = 0.05, py::arg("seed") = 0,
      py::arg("data_seed") = 0, py::arg("spread") = 0.1, py::arg("config") = LossConfig{});

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out;
        std::ostringstream err;
        const int code = run_cli(args, out, err);
        return std::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run the command-line tool in process; returns (exit code, stdout, stderr).");
}
