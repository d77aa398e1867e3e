#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "leq/data.hpp"
#include "leq/dressed.hpp"
#include "leq/metrics.hpp"
#include "leq/minkowski.hpp"
#include "leq/model.hpp"
#include "leq/optimizer.hpp"
#include "leq/qsim.hpp"
#include "leq/rng.hpp"
#include "leq/trainer.hpp"
#include "leq/verify.hpp"

namespace py = pybind11;

namespace {

leq::FourVector to_vec(const py::sequence& s) {
  if (py::len(s) != 4) throw std::invalid_argument("4-vector needs 4 entries");
  return {s[0].cast<double>(), s[1].cast<double>(), s[2].cast<double>(),
          s[3].cast<double>()};
}

leq::data::JetGraph jet_from_numpy(py::array_t<double> momenta, int label) {
  const auto buf = momenta.request();
  if (buf.ndim != 2 || buf.shape[1] != 4) {
    throw std::invalid_argument("momenta must have shape (N, 4)");
  }
  leq::data::JetGraph jet;
  jet.label = label;
  const double* p = static_cast<const double*>(buf.ptr);
  for (py::ssize_t i = 0; i < buf.shape[0]; ++i) {
    jet.momenta.emplace_back(p[4 * i], p[4 * i + 1], p[4 * i + 2], p[4 * i + 3]);
  }
  return jet;
}

std::vector<leq::qsim::GateOp> gates_from_list(const py::list& gates) {
  std::vector<leq::qsim::GateOp> prog;
  for (const auto& item : gates) {
    const py::dict d = item.cast<py::dict>();
    leq::qsim::GateOp g;
    g.kind = leq::qsim::gate_kind_from_name(d["kind"].cast<std::string>());
    const py::list qs = d["qubits"].cast<py::list>();
    g.qubits[0] = qs[0].cast<int>();
    g.qubits[1] = py::len(qs) > 1 ? qs[1].cast<int>() : -1;
    if (d.contains("angle")) g.angle = d["angle"].cast<double>();
    prog.push_back(g);
  }
  return prog;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Lorentz-equivariant quantum graph network core";

  // --- Minkowski geometry -------------------------------------------------
  m.def("mink_inner", [](const py::sequence& a, const py::sequence& b) {
    return leq::mink_inner(to_vec(a), to_vec(b));
  });
  m.def("mink_norm2_diff", [](const py::sequence& a, const py::sequence& b) {
    return leq::mink_norm2_diff(to_vec(a), to_vec(b));
  });
  m.def("invariant_mass2",
        [](const py::sequence& v) { return leq::invariant_mass2(to_vec(v)); });
  m.def("signed_log1p", &leq::signed_log1p);
  m.def("random_lorentz", [](std::uint64_t seed, double max_rapidity) {
    const auto t = leq::random_lorentz(seed, max_rapidity);
    py::array_t<double> out({4, 4});
    auto r = out.mutable_unchecked<2>();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) r(i, j) = t.at(i, j);
    return out;
  });

  // --- statevector simulator ----------------------------------------------
  m.def("run_program", [](int n_qubits, const py::list& gates) {
    const auto s = leq::qsim::run_program(n_qubits, gates_from_list(gates));
    py::array_t<std::complex<double>> out(
        std::vector<py::ssize_t>{static_cast<py::ssize_t>(s.dim())});
    auto r = out.mutable_unchecked<1>();
    for (std::size_t i = 0; i < s.dim(); ++i) r(static_cast<py::ssize_t>(i)) = s.amp(i);
    return out;
  });
  m.def("expect_z", [](int n_qubits, const py::list& gates, int qubit) {
    return leq::qsim::run_program(n_qubits, gates_from_list(gates)).expect_z(qubit);
  });

  // --- dressed quantum circuit ----------------------------------------------
  py::class_<leq::DressedCircuit>(m, "DressedCircuit")
      .def(py::init([](int n_qubits, int q_depth, double q_delta,
                       std::uint64_t seed) {
             leq::Rng rng(seed);
             return leq::DressedCircuit(n_qubits, q_depth, q_delta, rng);
           }),
           py::arg("n_qubits") = 4, py::arg("q_depth") = 2,
           py::arg("q_delta") = 0.01, py::arg("seed") = 0)
      .def_property(
          "weights",
          [](const leq::DressedCircuit& c) {
            py::array_t<double> out({c.q_depth, c.n_qubits});
            auto r = out.mutable_unchecked<2>();
            for (int k = 0; k < c.q_depth; ++k)
              for (int q = 0; q < c.n_qubits; ++q)
                r(k, q) = c.weights.values()[static_cast<std::size_t>(k) * c.n_qubits + q];
            return out;
          },
          [](leq::DressedCircuit& c, py::array_t<double> w) {
            const auto buf = w.request();
            if (buf.ndim != 2 || buf.shape[0] != c.q_depth ||
                buf.shape[1] != c.n_qubits) {
              throw std::invalid_argument("weights must be (q_depth, n_qubits)");
            }
            const double* p = static_cast<const double*>(buf.ptr);
            std::copy(p, p + c.weights.size(), c.weights.values().begin());
          })
      .def("forward",
           [](leq::DressedCircuit& c, py::array_t<double> features) {
             const auto buf = features.request();
             if (buf.ndim != 2 || buf.shape[1] != c.n_qubits) {
               throw std::invalid_argument("features must be (B, n_qubits)");
             }
             const double* p = static_cast<const double*>(buf.ptr);
             leq::diff::Tape tape;
             const leq::diff::Tensor f(
                 {static_cast<std::size_t>(buf.shape[0]),
                  static_cast<std::size_t>(c.n_qubits)},
                 std::vector<double>(p, p + buf.shape[0] * c.n_qubits));
             const auto out = leq::dressed_apply(tape, c, f);
             py::array_t<double> res({buf.shape[0],
                                      static_cast<py::ssize_t>(c.n_qubits)});
             auto r = res.mutable_unchecked<2>();
             for (py::ssize_t b = 0; b < buf.shape[0]; ++b)
               for (int q = 0; q < c.n_qubits; ++q)
                 r(b, q) = out.at(static_cast<std::size_t>(b),
                                  static_cast<std::size_t>(q));
             return res;
           })
      .def("gate_program", [](const leq::DressedCircuit& c,
                              const std::vector<double>& angles) {
        py::list out;
        for (const auto& g : c.gate_program(angles)) {
          py::dict d;
          d["kind"] = leq::qsim::gate_kind_name(g.kind);
          d["qubits"] = g.arity() == 2
                            ? std::vector<int>{g.qubits[0], g.qubits[1]}
                            : std::vector<int>{g.qubits[0]};
          if (g.has_angle()) d["angle"] = g.angle;
          out.append(d);
        }
        return out;
      });

  // --- model -----------------------------------------------------------------
  py::class_<leq::LorentzEqgnn>(m, "Model")
      .def(py::init([](const std::string& config_json, std::uint64_t seed) {
             return leq::LorentzEqgnn(
                 leq::ModelConfig::from_json_text(config_json), seed);
           }),
           py::arg("config_json") = "{}", py::arg("seed") = 0)
      .def("count_params", &leq::LorentzEqgnn::count_params)
      .def("forward",
           [](const leq::LorentzEqgnn& model, py::array_t<double> momenta,
              int label) {
             const auto jet = jet_from_numpy(momenta, label);
             leq::diff::Tape tape;
             const auto out = model.forward(tape, jet, false, 0);
             return py::make_tuple(
                 std::vector<double>{out.logits.values()[0],
                                     out.logits.values()[1]},
                 std::vector<double>{out.probs[0], out.probs[1]});
           },
           py::arg("momenta"), py::arg("label") = 0)
      .def("save", [](const leq::LorentzEqgnn& model, const std::string& path) {
        leq::save_checkpoint(model, path);
      })
      .def_static("load", [](const std::string& path) {
        return leq::load_checkpoint(path);
      });

  // --- data ------------------------------------------------------------------
  m.def("synth_jets", [](std::uint64_t seed, int n_per_class) {
    py::list out;
    for (const auto& jet : leq::data::synth_jets(seed, n_per_class)) {
      py::dict d;
      d["label"] = jet.label;
      py::list particles;
      for (const auto& p : jet.particles) {
        particles.append(std::vector<double>{p.e, p.px, p.py, p.pz});
      }
      d["particles"] = particles;
      out.append(d);
    }
    return out;
  });

  // --- metrics and schedule ---------------------------------------------------
  m.def("roc_auc", [](const std::vector<double>& scores,
                      const std::vector<int>& labels) {
    return leq::train::roc_auc(scores, labels);
  });
  m.def("background_rejection",
        [](const std::vector<double>& scores, const std::vector<int>& labels,
           double eps_s) {
          const auto r = leq::train::background_rejection(scores, labels, eps_s);
          return py::make_tuple(r.value, r.infinite);
        });
  m.def("lr_at", [](int epoch, const std::string& config_json) {
    return leq::train::lr_at(
        epoch, leq::train::TrainConfig::from_json_text(config_json));
  }, py::arg("epoch"), py::arg("config_json") = "{}");
}
