#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "maclab/analysis.hpp"
#include "maclab/coop.hpp"
#include "maclab/env.hpp"
#include "maclab/fedexp3.hpp"
#include "maclab/fedoco.hpp"
#include "maclab/graph.hpp"
#include "maclab/matching.hpp"
#include "maclab/policy.hpp"

namespace py = pybind11;
using namespace maclab;

namespace {

CommGraph build_topology(const std::string& kind, py::kwargs kw) {
    int delay = kw.contains("delay") ? kw["delay"].cast<int>() : 1;
    std::uint64_t seed = kw.contains("seed") ? kw["seed"].cast<std::uint64_t>() : 7;
    if (kind == "complete") return build_complete(kw["n"].cast<int>(), delay);
    if (kind == "star") return build_star(kw["n"].cast<int>(), delay);
    if (kind == "r_regular") return build_r_regular(kw["n"].cast<int>(), kw["r"].cast<int>(), delay);
    if (kind == "grid") return build_grid(kw["rows"].cast<int>(), kw["cols"].cast<int>(), delay);
    if (kind == "erdos_renyi") {
        double p = kw.contains("edge_prob") ? kw["edge_prob"].cast<double>() : -1.0;
        return build_erdos_renyi(kw["n"].cast<int>(), delay, seed, p);
    }
    if (kind == "rgg") return build_rgg(kw["n"].cast<int>(), kw["radius"].cast<double>(), delay, seed);
    throw std::invalid_argument("unknown topology kind: " + kind);
}

}  // namespace

PYBIND11_MODULE(_maclab, m) {
    m.doc() = "multi-agent regret-minimization simulation toolkit";

    py::class_<CommGraph>(m, "CommGraph")
        .def(py::init<int, int, std::vector<std::pair<int, int>>>(), py::arg("n_agents"),
             py::arg("edge_delay"), py::arg("edges"))
        .def_property_readonly("n_agents", &CommGraph::n_agents)
        .def_property_readonly("edge_delay", &CommGraph::edge_delay)
        .def_property_readonly("edges", &CommGraph::edges)
        .def("degree", &CommGraph::degree)
        .def("max_degree", &CommGraph::max_degree)
        .def("neighbors", &CommGraph::neighbors)
        .def("bfs_distances", &CommGraph::bfs_distances);

    m.def("build_topology", &build_topology, py::arg("kind"),
          "build_topology(kind, n=..., r=..., rows=..., cols=..., radius=..., delay=1, seed=7)");
    m.def("laplacian_spectrum", &laplacian_spectrum);
    m.def("max_degree_gossip", &max_degree_gossip);
    m.def("sigma2", &sigma2);
    m.def(
        "independence_number",
        [](const CommGraph& g, int exact_limit) {
            auto r = independence_number(g, exact_limit);
            return py::make_tuple(r.value, r.exact);
        },
        py::arg("graph"), py::arg("exact_limit") = 24);

    py::class_<GossipMatrix>(m, "GossipMatrix")
        .def_property_readonly("n", &GossipMatrix::n)
        .def("at", &GossipMatrix::at)
        .def("doubly_stochastic", &GossipMatrix::doubly_stochastic, py::arg("tol") = 1e-12);

    py::class_<CenterAssignment>(m, "CenterAssignment")
        .def_readonly("centers", &CenterAssignment::centers)
        .def_readonly("center_of", &CenterAssignment::center_of)
        .def_readonly("hop_distance", &CenterAssignment::hop_distance)
        .def_readonly("mass", &CenterAssignment::mass);
    m.def("select_centers", &select_centers, py::arg("graph"), py::arg("n_arms"));

    py::class_<LossTensor>(m, "LossTensor")
        .def_property_readonly("horizon", &LossTensor::horizon)
        .def_property_readonly("n_agents", &LossTensor::n_agents)
        .def_property_readonly("n_arms", &LossTensor::n_arms)
        .def("loss", &LossTensor::loss)
        .def("average_loss", &LossTensor::average_loss)
        .def_static("bernoulli_linear", &LossTensor::bernoulli_linear, py::arg("n_arms"),
                    py::arg("horizon"), py::arg("seed"), py::arg("n_agents") = 1)
        .def_static("federated_activation", &LossTensor::federated_activation)
        .def_static("from_ratings_file", &LossTensor::from_ratings_file)
        .def_static("from_tensor_file", &LossTensor::from_tensor_file)
        .def_static("materialized", &LossTensor::materialized)
        .def("write_tensor_file", &LossTensor::write_tensor_file);

    m.def("tsallis_ftrl_solve", [](std::vector<double> l, double eta) {
        return tsallis_ftrl_solve(l, eta);
    });
    m.def("hybrid_ftrl_solve", [](std::vector<double> l, double eta, double zeta) {
        return hybrid_ftrl_solve(l, eta, zeta);
    });
    m.def("entropic_argmin",
          [](std::vector<double> z, double eta) { return entropic_argmin(z, eta); });
    m.def("importance_weighted_estimate", &importance_weighted_estimate);

    py::enum_<CoopAlgorithm>(m, "CoopAlgorithm")
        .value("cftrl", CoopAlgorithm::cftrl)
        .value("dftrl", CoopAlgorithm::dftrl)
        .value("exp3_coop", CoopAlgorithm::exp3_coop)
        .value("center_exp3", CoopAlgorithm::center_exp3);

    py::class_<CoopTraceRow>(m, "CoopTraceRow")
        .def_readonly("t", &CoopTraceRow::t)
        .def_readonly("regret", &CoopTraceRow::regret)
        .def_readonly("avg_regret", &CoopTraceRow::avg_regret);

    py::class_<CoopResult>(m, "CoopResult")
        .def_readonly("trace", &CoopResult::trace)
        .def_readonly("final_regret", &CoopResult::final_regret)
        .def_readonly("final_avg_regret", &CoopResult::final_avg_regret)
        .def_readonly("floored_q_count", &CoopResult::floored_q_count);

    m.def(
        "run_cooperative",
        [](const CommGraph& g, const LossTensor& env, CoopAlgorithm algo, long long horizon,
           std::uint64_t seed, long long stride, std::optional<double> center_eta) {
            CoopOptions opt;
            opt.horizon = horizon;
            opt.seed = seed;
            opt.stride = stride;
            opt.center_eta = center_eta;
            return run_cooperative(g, env, algo, opt);
        },
        py::arg("graph"), py::arg("env"), py::arg("algorithm"), py::arg("horizon"),
        py::arg("seed") = 0, py::arg("stride") = 1, py::arg("center_eta") = std::nullopt);

    py::class_<FedExp3TraceRow>(m, "FedExp3TraceRow")
        .def_readonly("t", &FedExp3TraceRow::t)
        .def_readonly("regret", &FedExp3TraceRow::regret)
        .def_readonly("avg_regret", &FedExp3TraceRow::avg_regret);

    py::class_<FedExp3Result>(m, "FedExp3Result")
        .def_readonly("trace", &FedExp3Result::trace)
        .def_readonly("final_regret", &FedExp3Result::final_regret)
        .def_readonly("final_avg_regret", &FedExp3Result::final_avg_regret);

    m.def(
        "run_fedexp3",
        [](const CommGraph& g, const LossTensor& env, long long horizon, std::uint64_t seed,
           long long stride, double exploration_scale) {
            FedExp3Options opt;
            opt.horizon = horizon;
            opt.seed = seed;
            opt.stride = stride;
            opt.exploration_scale = exploration_scale;
            return run_fedexp3(g, env, opt);
        },
        py::arg("graph"), py::arg("env"), py::arg("horizon"), py::arg("seed") = 0,
        py::arg("stride") = 1, py::arg("exploration_scale") = 1.0);

    m.def("fedexp3_schedules", [](int k, long long t, int n, double s2) {
        auto s = fedexp3_schedules(k, t, n, s2);
        py::dict out;
        out["c_w"] = s.c_w;
        out["eta"] = s.eta;
        out["gamma_1"] = s.gamma(1);
        out["gamma_T"] = s.gamma(t);
        return out;
    });

    py::class_<OcoProblem>(m, "OcoProblem")
        .def_static("linear", &OcoProblem::linear)
        .def_static("quadratic", &OcoProblem::quadratic)
        .def_property_readonly("dim", &OcoProblem::dim)
        .def_property_readonly("lipschitz", &OcoProblem::lipschitz);

    py::class_<FedOcoTraceRow>(m, "FedOcoTraceRow")
        .def_readonly("t", &FedOcoTraceRow::t)
        .def_readonly("regret", &FedOcoTraceRow::regret)
        .def_readonly("q_running", &FedOcoTraceRow::q_running);

    py::class_<FedOcoResult>(m, "FedOcoResult")
        .def_readonly("trace", &FedOcoResult::trace)
        .def_readonly("final_regret", &FedOcoResult::final_regret)
        .def_readonly("q_total", &FedOcoResult::q_total)
        .def_readonly("lambda2", &FedOcoResult::lambda2);

    m.def(
        "run_fedoco",
        [](const CommGraph& g, const OcoProblem& p, double alpha, std::uint64_t seed,
           long long stride) {
            FedOcoOptions opt;
            opt.alpha = alpha;
            opt.seed = seed;
            opt.stride = stride;
            return run_fedoco(g, p, opt);
        },
        py::arg("graph"), py::arg("problem"), py::arg("alpha"), py::arg("seed") = 0,
        py::arg("stride") = 1);

    py::enum_<ValueFn>(m, "ValueFn").value("AND", ValueFn::AND).value("OR", ValueFn::OR);

    py::class_<NodePopulation>(m, "NodePopulation")
        .def_static("sample", &NodePopulation::sample)
        .def_readonly("n", &NodePopulation::n)
        .def_readonly("p", &NodePopulation::p)
        .def_readonly("types", &NodePopulation::types)
        .def("high_count", &NodePopulation::high_count);

    py::class_<MatchTraceRow>(m, "MatchTraceRow")
        .def_readonly("round", &MatchTraceRow::round)
        .def_readonly("reward", &MatchTraceRow::reward)
        .def_readonly("regret", &MatchTraceRow::regret)
        .def_readonly("num_sets", &MatchTraceRow::num_sets);

    py::class_<IncrementalTrace>(m, "IncrementalTrace")
        .def_readonly("rows", &IncrementalTrace::rows)
        .def_readonly("tau", &IncrementalTrace::tau)
        .def_readonly("total_regret", &IncrementalTrace::total_regret)
        .def_readonly("optimal", &IncrementalTrace::optimal)
        .def_readonly("max_pair_delta", &IncrementalTrace::max_pair_delta)
        .def_readonly("delta_violations", &IncrementalTrace::delta_violations);

    m.def(
        "greedy_bayes_or",
        [](const NodePopulation& pop, std::uint64_t seed, long long stride) {
            MatchOptions opt;
            opt.run_seed = seed;
            opt.stride = stride;
            return greedy_bayes_or(pop, opt);
        },
        py::arg("population"), py::arg("seed") = 0, py::arg("stride") = 1);
    m.def(
        "greedy_bayes_and",
        [](const NodePopulation& pop, std::uint64_t seed, long long stride) {
            MatchOptions opt;
            opt.run_seed = seed;
            opt.stride = stride;
            return greedy_bayes_and(pop, opt);
        },
        py::arg("population"), py::arg("seed") = 0, py::arg("stride") = 1);

    m.def("pair_value", &pair_value);
    m.def("optimal_value", &optimal_value);
    m.def("posterior_pi", &posterior_pi);
    m.def(
        "superepoch_chain",
        [](long long n, double p, std::uint64_t seed) {
            std::vector<std::pair<long long, long long>> out;
            for (auto s : superepoch_chain(n, p, seed)) out.push_back({s.x, s.y});
            return out;
        },
        py::arg("n"), py::arg("p"), py::arg("seed") = 0);

    m.def("or_asymptotic_regret", &or_asymptotic_regret);
    m.def("and_regret_bound", &and_regret_bound, py::arg("n"), py::arg("p"), py::arg("c") = 39.0);
    m.def("fedexp3_regret_bound", &fedexp3_regret_bound);
    m.def(
        "random_matching_regret",
        [](double n, double p, const std::string& fn) {
            return random_matching_regret(n, p, fn == "and" ? MatchValueKind::AND : MatchValueKind::OR);
        },
        py::arg("n"), py::arg("p"), py::arg("fn"));
}
