#pragma once

// Experiment harness: JSON configs in, plot-ready CSV + manifest out.
// Everything the CLI emits is recomputable from the library modules alone;
// the harness only wires them together.

#include "vsmargin/asymptotics.hpp"
#include "vsmargin/common.hpp"
#include "vsmargin/losses.hpp"
#include "vsmargin/maxmargin.hpp"
#include "vsmargin/model_data.hpp"
#include "vsmargin/optim.hpp"
#include "vsmargin/risk_eval.hpp"
#include "vsmargin/tuning.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace vsmargin::cli {

using nlohmann::json;

// ----- worker pool ---------------------------------------------------------

inline int thread_count() {
    if (const char* env = std::getenv("VSMARGIN_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : int(hw);
}

// Deterministic parallel map: task i writes slot i; merge order is fixed by
// index regardless of scheduling.
inline void parallel_for(int n_tasks, const std::function<void(int)>& task) {
    const int n_threads = std::min(thread_count(), std::max(1, n_tasks));
    if (n_threads == 1) {
        for (int i = 0; i < n_tasks; ++i) task(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n_tasks) return;
                task(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

// ----- JSON <-> domain types ----------------------------------------------

inline Mat means_from_json(const json& j) {
    require(j.is_array() && j.size() == 2, "config: 'means' must hold 2 columns");
    const auto c0 = j[0].get<std::vector<double>>();
    const auto c1 = j[1].get<std::vector<double>>();
    require(c0.size() == c1.size(), "config: mean columns differ in length");
    Mat m(c0.size(), 2);
    for (std::size_t i = 0; i < c0.size(); ++i) {
        m(Eigen::Index(i), 0) = c0[i];
        m(Eigen::Index(i), 1) = c1[i];
    }
    return m;
}

inline LabelGmmSpec label_spec_from_json(const json& j) {
    LabelGmmSpec spec;
    spec.meanModel = gramian_decompose(means_from_json(j.at("means")));
    spec.pi = j.at("pi").get<double>();
    if (j.contains("covariance") && !j["covariance"].is_null()) {
        const auto rows = j["covariance"].get<std::vector<std::vector<double>>>();
        Mat sigma(rows.size(), rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            require(rows[r].size() == rows.size(), "covariance must be square");
            for (std::size_t c = 0; c < rows.size(); ++c)
                sigma(Eigen::Index(r), Eigen::Index(c)) = rows[r][c];
        }
        spec.covariance = sigma;
    }
    return spec;
}

inline GroupGmmSpec group_spec_from_json(const json& j) {
    GroupGmmSpec spec;
    spec.meanModel = gramian_decompose(means_from_json(j.at("means")));
    spec.pi = j.value("pi", 0.5);
    spec.p = j.at("p").get<double>();
    spec.sigma1 = j.value("sigma1", 1.0);
    spec.sigma2 = j.value("sigma2", 1.0);
    return spec;
}

inline VsParams vs_params_from_json(const json& j) {
    VsParams p;
    const auto om = j.at("omega").get<std::vector<double>>();
    const auto io = j.at("iota").get<std::vector<double>>();
    const auto de = j.at("delta").get<std::vector<double>>();
    p.omega = Eigen::Map<const Vec>(om.data(), Eigen::Index(om.size()));
    p.iota = Eigen::Map<const Vec>(io.data(), Eigen::Index(io.size()));
    p.delta = Eigen::Map<const Vec>(de.data(), Eigen::Index(de.size()));
    p.validate();
    return p;
}

inline json solution_to_json(const MarginSolution& sol, double delta) {
    json j;
    j["w"] = std::vector<double>(sol.model.w.data(),
                                 sol.model.w.data() + sol.model.w.size());
    j["b"] = sol.model.b;
    j["delta"] = delta;
    j["margin"] = sol.margin_value;
    j["duality_gap"] = sol.duality_gap;
    return j;
}

// ----- CSV emission --------------------------------------------------------

inline void write_dataset_csv(const std::filesystem::path& path,
                              const Dataset& ds) {
    std::ofstream out(path);
    require(bool(out), "cannot open " + path.string());
    out << "y,g";
    for (Eigen::Index j = 0; j < ds.d(); ++j) out << ",x" << (j + 1);
    out << "\n";
    out.precision(17);
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        out << ds.y(i) << ",";
        if (ds.has_groups()) out << ds.g(i);
        for (Eigen::Index j = 0; j < ds.d(); ++j) out << "," << ds.X(i, j);
        out << "\n";
    }
}

inline Dataset read_dataset_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(bool(in), "cannot open " + path.string());
    std::string line;
    require(bool(std::getline(in, line)), "empty dataset file");
    std::vector<int> ys, gs;
    std::vector<std::vector<double>> rows;
    bool any_group = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');
        ys.push_back(std::stoi(cell));
        std::getline(ss, cell, ',');
        if (cell.empty()) {
            gs.push_back(0);
        } else {
            gs.push_back(std::stoi(cell));
            any_group = true;
        }
        std::vector<double> x;
        while (std::getline(ss, cell, ',')) x.push_back(std::stod(cell));
        rows.push_back(std::move(x));
    }
    Dataset ds;
    const auto n = rows.size();
    require(n > 0, "dataset file has no rows");
    ds.X.resize(Eigen::Index(n), Eigen::Index(rows[0].size()));
    ds.y.resize(Eigen::Index(n));
    if (any_group) ds.g.resize(Eigen::Index(n));
    for (std::size_t i = 0; i < n; ++i) {
        ds.y(Eigen::Index(i)) = ys[i];
        if (any_group) ds.g(Eigen::Index(i)) = gs[i];
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            ds.X(Eigen::Index(i), Eigen::Index(j)) = rows[i][j];
    }
    return ds;
}

struct TheoryRow {
    double gamma, delta, q, rho1, rho2, b;
    double R_plus, R_minus, R_bal, R_std, DEO;
};

inline void write_theory_csv(const std::filesystem::path& path,
                             const std::vector<TheoryRow>& rows) {
    std::ofstream out(path);
    require(bool(out), "cannot open " + path.string());
    out << "gamma,delta,q,rho1,rho2,b,R_plus,R_minus,R_bal,R_std,DEO\n";
    out.precision(12);
    for (const auto& r : rows) {
        out << r.gamma << "," << r.delta << "," << r.q << "," << r.rho1 << ","
            << r.rho2 << "," << r.b << "," << r.R_plus << "," << r.R_minus
            << "," << r.R_bal << "," << r.R_std << "," << r.DEO << "\n";
    }
}

inline TheoryRow theory_row(const TheoryProblem& prob,
                            const AsymptoticTriple& triple,
                            const RiskReport& risks) {
    TheoryRow row;
    row.gamma = prob.gamma;
    row.delta = prob.delta;
    row.q = triple.q;
    row.rho1 = triple.rho(0);
    row.rho2 = triple.rho.size() > 1 ? triple.rho(1) : 0.0;
    row.b = triple.b;
    row.R_plus = risks.R_plus;
    row.R_minus = risks.R_minus;
    row.R_bal = risks.R_bal;
    row.R_std = risks.R;
    row.DEO = risks.has_groups ? risks.DEO : 0.0;
    return row;
}

// ----- DEO zero crossing ---------------------------------------------------

inline double theory_deo(const TheoryProblem& prob, double delta) {
    TheoryProblem at = prob;
    at.delta = delta;
    return predict_risks(solve_triple(at), at).DEO;
}

// Bisection on the theoretical DEO over delta in [lo, hi] to |DEO| <= 1e-6.
inline double find_deo_zero(const TheoryProblem& prob, double lo, double hi) {
    require(prob.has_group, "find_deo_zero: group problem required");
    require(0.0 < lo && lo < hi, "find_deo_zero: bad bracket");
    double f_lo = theory_deo(prob, lo);
    double f_hi = theory_deo(prob, hi);
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    if (f_lo * f_hi > 0.0) {
        throw std::runtime_error(
            "find_deo_zero: no sign change on bracket; DEO(" +
            std::to_string(lo) + ") = " + std::to_string(f_lo) + ", DEO(" +
            std::to_string(hi) + ") = " + std::to_string(f_hi));
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = theory_deo(prob, mid);
        if (std::abs(f_mid) <= 1e-6) return mid;
        if (f_mid * f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// ----- manifest ------------------------------------------------------------

inline void write_manifest(const std::filesystem::path& out_dir,
                           const json& config,
                           const std::vector<std::string>& artifacts) {
    json m;
    m["config"] = config;
    m["config_hash"] = std::to_string(std::hash<std::string>{}(config.dump()));
    m["artifacts"] = artifacts;
    m["tool"] = "vsmargin";
    m["version"] = "1.0.0";
    std::ofstream out(out_dir / "manifest.json");
    out << m.dump(2) << "\n";
}

// ----- subcommands ---------------------------------------------------------

inline TheoryProblem problem_from_config(const json& config) {
    TheoryProblem prob;
    if (config.contains("group_spec")) {
        const auto spec = group_spec_from_json(config.at("group_spec"));
        prob.meanModel = spec.meanModel;
        prob.pi = spec.pi;
        prob.has_group = true;
        prob.p = spec.p;
        prob.sigma1 = spec.sigma1;
        prob.sigma2 = spec.sigma2;
    } else {
        const auto spec = label_spec_from_json(config.at("spec"));
        prob.meanModel = whiten(spec).meanModel;
        prob.pi = spec.pi;
    }
    prob.gamma = config.value("gamma", 1.0);
    prob.delta = config.value("delta", 1.0);
    return prob;
}

inline int cmd_gen(const json& config, const std::filesystem::path& out_dir) {
    const int n = config.at("n").get<int>();
    const std::uint64_t seed = config.value("seed", 0);
    Dataset ds;
    if (config.contains("group_spec")) {
        ds = sample_group_gmm(group_spec_from_json(config["group_spec"]), n, seed);
    } else {
        ds = sample_label_gmm(label_spec_from_json(config.at("spec")), n, seed);
    }
    write_dataset_csv(out_dir / "dataset.csv", ds);
    write_manifest(out_dir, config, {"dataset.csv"});
    return 0;
}

inline int cmd_svm(const json& config, const std::filesystem::path& out_dir) {
    Dataset ds;
    if (config.contains("dataset")) {
        ds = read_dataset_csv(config["dataset"].get<std::string>());
    } else {
        const int n = config.at("n").get<int>();
        const std::uint64_t seed = config.value("seed", 0);
        if (config.contains("group_spec")) {
            ds = sample_group_gmm(group_spec_from_json(config["group_spec"]), n,
                                  seed);
        } else {
            ds = sample_label_gmm(label_spec_from_json(config.at("spec")), n,
                                  seed);
        }
    }
    const bool intercept = config.value("intercept", true);
    MarginSolution sol;
    double delta = config.value("delta", 1.0);
    if (config.contains("delta_group")) {
        const auto dg = config["delta_group"].get<std::vector<double>>();
        require(dg.size() == 2, "delta_group must have 2 entries");
        sol = gs_svm(ds, dg[0], dg[1], intercept);
        delta = dg[0] / dg[1];
    } else {
        sol = cs_svm(ds, delta, intercept);
    }
    std::ofstream out(out_dir / "solution.json");
    out << solution_to_json(sol, delta).dump(2) << "\n";
    write_manifest(out_dir, config, {"solution.json"});
    return 0;
}

inline int cmd_theory(const json& config,
                      const std::filesystem::path& out_dir) {
    TheoryProblem base = problem_from_config(config);
    std::vector<double> gammas = {base.gamma};
    std::vector<double> deltas = {base.delta};
    if (config.contains("gamma_grid"))
        gammas = config["gamma_grid"].get<std::vector<double>>();
    if (config.contains("delta_grid"))
        deltas = config["delta_grid"].get<std::vector<double>>();
    std::vector<TheoryRow> rows(gammas.size() * deltas.size());
    parallel_for(int(rows.size()), [&](int k) {
        TheoryProblem prob = base;
        prob.gamma = gammas[std::size_t(k) / deltas.size()];
        prob.delta = deltas[std::size_t(k) % deltas.size()];
        const auto triple = solve_triple(prob);
        rows[std::size_t(k)] = theory_row(prob, triple, predict_risks(triple, prob));
    });
    write_theory_csv(out_dir / "theory.csv", rows);
    write_manifest(out_dir, config, {"theory.csv"});
    return 0;
}

inline int cmd_tune(const json& config, const std::filesystem::path& out_dir) {
    TheoryProblem prob = problem_from_config(config);
    const auto star = delta_star_from_theory(prob);
    json j;
    j["delta_star"] = star.delta;
    j["branch"] = star.branch;
    TheoryProblem at = prob;
    at.delta = star.delta;
    const auto triple = solve_triple(at);
    const auto risks = predict_risks(triple, at);
    j["R_bal_at_star"] = risks.R_bal;
    j["R_plus"] = risks.R_plus;
    j["R_minus"] = risks.R_minus;
    if (config.contains("n")) {
        const auto spec = label_spec_from_json(config.at("spec"));
        const auto ds = sample_label_gmm(spec, config["n"].get<int>(),
                                         config.value("seed", 0));
        const auto heur = delta_star_heuristic(ds);
        j["delta_star_heuristic"] = heur.delta;
        j["heuristic_branch"] = heur.branch;
    }
    std::ofstream out(out_dir / "tune.json");
    out << j.dump(2) << "\n";
    write_manifest(out_dir, config, {"tune.json"});
    return 0;
}

inline int cmd_phase(const json& config,
                     const std::filesystem::path& out_dir) {
    TheoryProblem prob = problem_from_config(config);
    const double gs = gamma_star(prob);
    const auto gammas = config.at("gamma_grid").get<std::vector<double>>();
    const int seeds = config.value("seeds", 50);
    const int n = config.value("n", 400);
    const bool intercept = config.value("intercept", true);
    const auto spec = label_spec_from_json(config.at("spec"));

    std::vector<double> frac(gammas.size());
    parallel_for(int(gammas.size()), [&](int k) {
        const int d = std::max(1, int(std::lround(gammas[std::size_t(k)] * n)));
        int sep = 0;
        for (int s = 0; s < seeds; ++s) {
            LabelGmmSpec padded = spec;
            Mat means = Mat::Zero(d, 2);
            const auto dd = std::min<Eigen::Index>(d, spec.meanModel.means.rows());
            means.topRows(dd) = spec.meanModel.means.topRows(dd);
            padded.meanModel = gramian_decompose(means);
            const auto ds = sample_label_gmm(padded, n,
                                             std::uint64_t(1000 * k + s + 1));
            sep += is_separable(ds, intercept) ? 1 : 0;
        }
        frac[std::size_t(k)] = double(sep) / seeds;
    });
    std::ofstream out(out_dir / "phase.csv");
    out << "gamma,gamma_star,separable_fraction\n";
    out.precision(12);
    for (std::size_t k = 0; k < gammas.size(); ++k)
        out << gammas[k] << "," << gs << "," << frac[k] << "\n";
    write_manifest(out_dir, config, {"phase.csv"});
    return 0;
}

inline int cmd_deo_zero(const json& config,
                        const std::filesystem::path& out_dir) {
    TheoryProblem prob = problem_from_config(config);
    const double lo = config.value("delta_lo", 1.0);
    const double hi = config.value("delta_hi", 50.0);
    const double d0 = find_deo_zero(prob, lo, hi);
    TheoryProblem at = prob;
    at.delta = d0;
    const auto risks = predict_risks(solve_triple(at), at);
    json j;
    j["delta_zero"] = d0;
    j["DEO"] = risks.DEO;
    j["R_bal"] = risks.R_bal;
    std::ofstream out(out_dir / "deo_zero.json");
    out << j.dump(2) << "\n";
    write_manifest(out_dir, config, {"deo_zero.json"});
    return 0;
}

inline int cmd_train(const json& config,
                     const std::filesystem::path& out_dir) {
    const auto spec = label_spec_from_json(config.at("spec"));
    const int n = config.at("n").get<int>();
    const auto ds = sample_label_gmm(spec, n, config.value("seed", 0));

    VsParams params;
    if (config.contains("vs_params")) {
        params = vs_params_from_json(config["vs_params"]);
    } else {
        params.omega = Vec::Ones(2);
        params.iota = Vec::Zero(2);
        params.delta = Vec::Ones(2);
        if (config.contains("delta_ratio")) {
            // delta ratio delta = Delta_- / Delta_+ applied as (1, delta).
            params.delta(1) = config["delta_ratio"].get<double>();
        }
    }
    const double delta_ratio = params.delta(1) / params.delta(0);

    GdConfig gd;
    gd.schedule = config.value("schedule", std::string("normalized")) ==
                          std::string("constant")
                      ? GdConfig::Schedule::Constant
                      : GdConfig::Schedule::Normalized;
    gd.eta = config.value("eta", 0.1);
    gd.max_iters = config.value("iters", 10000);
    gd.record_every = config.value("record_every", 100);

    const auto cs_sol = cs_svm(ds, delta_ratio, true);
    const auto svm_sol = delta_ratio == 1.0 ? cs_sol : svm(ds, true);

    LossGradFn fn = [&](const Vec& w, double b, Vec& gw, double& gb) {
        LinearModel m{w, b};
        const double loss = vs_loss_binary(params, m, ds);
        vs_grad_binary(params, m, ds, gw, gb);
        return loss;
    };
    LinearModel init;
    init.w = Vec::Zero(ds.d());
    auto [model, traj] = gd_train(fn, init, gd);

    std::ofstream out(out_dir / "trajectory.csv");
    out << "iter,loss,grad_norm,w_norm,angle_gap_cs,angle_gap_svm,balanced_err\n";
    out.precision(12);
    for (const auto& pt : traj.points) {
        if (pt.w.norm() == 0.0) continue;
        LinearModel m{pt.w, pt.b};
        out << pt.iter << "," << pt.loss << "," << pt.grad_norm << ","
            << pt.w_norm << "," << angle_gap(m, cs_sol.model) << ","
            << angle_gap(m, svm_sol.model) << ","
            << closed_form_risks(m, spec).R_bal << "\n";
    }
    write_manifest(out_dir, config, {"trajectory.csv"});
    return 0;
}

// Named experiment sweeps (the `sweep` subcommand dispatches here).
inline int run(const json& config, const std::filesystem::path& out_dir);

inline int dispatch(const std::string& sub, const json& config,
                    const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    if (sub == "gen") return cmd_gen(config, out_dir);
    if (sub == "svm") return cmd_svm(config, out_dir);
    if (sub == "theory") return cmd_theory(config, out_dir);
    if (sub == "tune") return cmd_tune(config, out_dir);
    if (sub == "phase") return cmd_phase(config, out_dir);
    if (sub == "deo-zero") return cmd_deo_zero(config, out_dir);
    if (sub == "train") return cmd_train(config, out_dir);
    if (sub == "sweep") return run(config, out_dir);
    throw std::invalid_argument("unknown subcommand: " + sub);
}

// ----- named experiments ---------------------------------------------------

inline int run(const json& config, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::string kind = config.at("experiment").get<std::string>();

    if (kind == "fig1a_sweep") {
        // Feature-truncation sweep: train on the first p coordinates and
        // compare Monte-Carlo balanced error of CS-SVM against theory.
        const auto spec = label_spec_from_json(config.at("spec"));
        const int n = config.value("n", 100);
        const int seeds = config.value("seeds", 25);
        const double delta = config.value("delta", 1.0);
        const auto p_grid = config.at("p_grid").get<std::vector<int>>();
        struct Row {
            int p;
            double mc_rbal, mc_se, th_rbal;
        };
        std::vector<Row> rows(p_grid.size());
        parallel_for(int(p_grid.size()), [&](int k) {
            const int p = p_grid[std::size_t(k)];
            const auto tspec = truncate_features(spec, p);
            double acc = 0.0, acc2 = 0.0;
            int ok = 0;
            for (int s = 0; s < seeds; ++s) {
                const auto ds =
                    sample_label_gmm(tspec, n, std::uint64_t(7000 + 97 * k + s));
                try {
                    const auto sol = cs_svm(ds, delta, true);
                    const double rb = closed_form_risks(sol.model, tspec).R_bal;
                    acc += rb;
                    acc2 += rb * rb;
                    ++ok;
                } catch (const InfeasibleError&) {
                }
            }
            Row row;
            row.p = p;
            row.mc_rbal = ok ? acc / ok : std::numeric_limits<double>::quiet_NaN();
            row.mc_se = ok > 1 ? std::sqrt(std::max(
                                     0.0, (acc2 / ok - row.mc_rbal * row.mc_rbal) /
                                              (ok - 1)))
                               : 0.0;
            row.th_rbal = std::numeric_limits<double>::quiet_NaN();
            TheoryProblem prob;
            prob.meanModel = tspec.meanModel;
            prob.pi = tspec.pi;
            prob.gamma = double(p) / n;
            prob.delta = delta;
            try {
                const auto triple = solve_triple(prob);
                row.th_rbal = predict_risks(triple, prob).R_bal;
            } catch (const RegimeError&) {
            }
            rows[std::size_t(k)] = row;
        });
        std::ofstream out(out_dir / "fig1a.csv");
        out << "p,gamma,mc_R_bal,mc_se,theory_R_bal\n";
        out.precision(12);
        for (const auto& r : rows)
            out << r.p << "," << double(r.p) / n << "," << r.mc_rbal << ","
                << r.mc_se << "," << r.th_rbal << "\n";
        write_manifest(out_dir, config, {"fig1a.csv"});
        return 0;
    }

    if (kind == "fig1bc_dynamics") return cmd_train(config, out_dir);

    if (kind == "tradeoff_label") {
        // Theory curves of (R_bal, R_plus, R_minus) against delta.
        json c = config;
        if (!c.contains("delta_grid")) {
            std::vector<double> grid;
            for (int i = 0; i <= 80; ++i)
                grid.push_back(std::pow(10.0, -1.0 + 2.5 * i / 80.0));
            c["delta_grid"] = grid;
        }
        return cmd_theory(c, out_dir);
    }

    if (kind == "tradeoff_group") {
        json c = config;
        if (!c.contains("delta_grid")) {
            std::vector<double> grid;
            for (int i = 0; i <= 60; ++i)
                grid.push_back(std::pow(10.0, 2.0 * i / 60.0));
            c["delta_grid"] = grid;
        }
        const int rc = cmd_theory(c, out_dir);
        // Also locate the DEO zero crossing when a bracket is available.
        try {
            TheoryProblem prob = problem_from_config(config);
            const double d0 = find_deo_zero(prob, config.value("delta_lo", 1.0),
                                            config.value("delta_hi", 50.0));
            json j;
            j["delta_zero"] = d0;
            std::ofstream out(out_dir / "deo_zero.json");
            out << j.dump(2) << "\n";
        } catch (const std::exception&) {
        }
        return rc;
    }

    if (kind == "phase_transition") return cmd_phase(config, out_dir);
    if (kind == "tune_delta") return cmd_tune(config, out_dir);

    if (kind == "undersampling") {
        const auto spec = label_spec_from_json(config.at("spec"));
        const double gamma = config.at("gamma").get<double>();
        const auto report =
            undersampling_risks(gamma, spec.pi, spec.meanModel);
        json j;
        j["R_plus"] = report.R_plus;
        j["R_minus"] = report.R_minus;
        j["R_bal"] = report.R_bal;
        std::ofstream out(out_dir / "undersampling.json");
        out << j.dump(2) << "\n";
        write_manifest(out_dir, config, {"undersampling.json"});
        return 0;
    }

    throw std::invalid_argument("unknown experiment kind: " + kind);
}

}  // namespace vsmargin::cli
