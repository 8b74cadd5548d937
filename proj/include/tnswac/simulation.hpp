#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "tnswac/procedures.hpp"

namespace tnswac {

/// Counter-based per-replicate random stream: the state is a splitmix64 hash
/// of (seed, replicate index), so replicate i's draws are identical no matter
/// how replicates are partitioned across workers.
class ReplicateRng {
public:
    ReplicateRng(std::uint64_t seed, std::uint64_t replicate_index) {
        state_ = mix(seed + 0x9E3779B97F4A7C15ULL * (replicate_index + 1));
        state_ = mix(state_ ^ replicate_index);
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix(state_);
    }

    /// Uniform draw in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

/// Exposure probability implied by a baseline probability and an odds ratio.
inline double or_to_prob(double base_prob, double odds_ratio) {
    if (!(base_prob > 0.0 && base_prob < 1.0))
        throw std::invalid_argument("or_to_prob: base_prob must lie in (0,1)");
    if (!(odds_ratio > 0.0)) throw std::invalid_argument("or_to_prob: odds_ratio must be > 0");
    const double odds = odds_ratio * base_prob / (1.0 - base_prob);
    return odds / (1.0 + odds);
}

/// Study-generation parameters. Group order is (P, N, C) throughout.
struct SimulationConfig {
    long long n_total = 1250;
    std::array<double, 3> group_probs = {0.3, 0.3, 0.4};
    std::array<double, 3> exposure_probs = {0.2, 0.2, 0.2};
    double alpha = 0.05;
    long long replicates = 10000;
    std::uint64_t seed = 0;
    unsigned threads = 1;  // 0 = hardware concurrency

    void validate() const {
        if (n_total < 0) throw std::invalid_argument("n_total must be >= 0");
        if (replicates < 0) throw std::invalid_argument("replicates must be >= 0");
        double sum = 0.0;
        for (double g : group_probs) {
            if (!(g >= 0.0 && g <= 1.0))
                throw std::invalid_argument("group_probs must lie in [0,1]");
            sum += g;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("group_probs must sum to 1");
        for (double q : exposure_probs)
            if (!(q >= 0.0 && q <= 1.0))
                throw std::invalid_argument("exposure_probs must lie in [0,1]");
        detail::check_alpha(alpha);
    }
};

/// Which null hypotheses are actually true in a simulated scenario. H0(iii)
/// is true exactly when both H0(i) and H0(ii) are.
struct TruthLabels {
    bool h_i = true;
    bool h_ii = true;
    bool h_iii = true;

    void validate() const {
        if (h_iii != (h_i && h_ii))
            throw std::invalid_argument(
                "TruthLabels: h_iii must be true exactly when h_i and h_ii both are");
    }
    bool any_true() const { return h_i || h_ii || h_iii; }
};

struct ProcedureChoice {
    Procedure procedure = Procedure::standard;
    Method2Variant variant = Method2Variant::example_consistent;

    std::string name() const {
        if (procedure != Procedure::method2) return to_string(procedure);
        return "method2_" + to_string(variant);
    }
};

inline std::vector<ProcedureChoice> all_procedures() {
    return {{Procedure::standard, Method2Variant::example_consistent},
            {Procedure::method1, Method2Variant::example_consistent},
            {Procedure::method2, Method2Variant::strict_lambda},
            {Procedure::method2, Method2Variant::example_consistent}};
}

/// One simulated study: each of n_total individuals draws a group from
/// group_probs and an exposure from that group's exposure probability.
/// Pure function of (config.seed, replicate_index).
inline StudyCounts simulate_counts(const SimulationConfig& config, long long replicate_index) {
    config.validate();
    ReplicateRng rng(config.seed, static_cast<std::uint64_t>(replicate_index));
    const double cut_P = config.group_probs[0];
    const double cut_N = config.group_probs[0] + config.group_probs[1];
    StudyCounts counts;
    for (long long i = 0; i < config.n_total; ++i) {
        const double u = rng.uniform();
        const int group = u < cut_P ? 0 : (u < cut_N ? 1 : 2);
        const bool exposed = rng.uniform() < config.exposure_probs[static_cast<std::size_t>(group)];
        switch (group) {
            case 0: (exposed ? counts.n_P1 : counts.n_P0)++; break;
            case 1: (exposed ? counts.n_N1 : counts.n_N0)++; break;
            default: (exposed ? counts.n_C1 : counts.n_C0)++; break;
        }
    }
    return counts;
}

struct MetricEstimate {
    unsigned long long count = 0;
    double freq = 0.0;
    double se = 0.0;
};

struct ProcedureSummary {
    ProcedureChoice choice;
    MetricEstimate reject_i;
    MetricEstimate reject_ii;
    MetricEstimate reject_iii;
    MetricEstimate reject_union;
    MetricEstimate reject_any;
    MetricEstimate reject_all;
    MetricEstimate fwer;  // frequency of rejecting any true null
};

struct JointTailCell {
    double p = 0.0;
    double q = 0.0;
    double joint_freq = 0.0;  // empirical P(P_i <= p, P_iii <= q)
    double excess = 0.0;      // joint_freq - p*q
    double se = 0.0;
};

inline constexpr std::array<double, 4> kJointTailGrid = {0.05, 0.1, 0.25, 0.5};

struct SimulationSummary {
    long long replicates = 0;
    std::uint64_t seed = 0;
    double alpha = 0.05;
    TruthLabels truth;
    std::vector<ProcedureSummary> procedures;
    double corr_i_ii = 0.0;
    double corr_i_iii = 0.0;
    std::vector<JointTailCell> joint_tail;
    double max_joint_excess = 0.0;
};

namespace detail {

struct ReplicateResult {
    PValueSet p;
    std::vector<DecisionSet> decisions;
};

// Workers fill a slot per replicate; the reduction below runs single-threaded
// in index order, so the summary is identical for any thread count.
inline std::vector<ReplicateResult> evaluate_replicates(
    const SimulationConfig& config, const std::vector<ProcedureChoice>& procedures) {
    std::vector<ReplicateResult> results(static_cast<std::size_t>(config.replicates));
    const auto worker = [&](long long begin, long long end) {
        for (long long r = begin; r < end; ++r) {
            auto& slot = results[static_cast<std::size_t>(r)];
            const StudyCounts counts = simulate_counts(config, r);
            slot.p = compute_pvalues(comparison_tables(counts));
            slot.decisions.reserve(procedures.size());
            for (const auto& choice : procedures)
                slot.decisions.push_back(
                    run_procedure(slot.p, config.alpha, choice.procedure, choice.variant));
        }
    };
    unsigned threads = config.threads == 0 ? std::thread::hardware_concurrency() : config.threads;
    threads = std::max(1u, threads);
    if (threads == 1 || config.replicates < 2) {
        worker(0, config.replicates);
    } else {
        std::vector<std::thread> pool;
        const long long chunk = (config.replicates + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const long long begin = static_cast<long long>(t) * chunk;
            const long long end = std::min<long long>(begin + chunk, config.replicates);
            if (begin >= end) break;
            pool.emplace_back(worker, begin, end);
        }
        for (auto& th : pool) th.join();
    }
    return results;
}

inline MetricEstimate make_estimate(unsigned long long count, long long replicates) {
    MetricEstimate m;
    m.count = count;
    if (replicates > 0) {
        m.freq = static_cast<double>(count) / static_cast<double>(replicates);
        m.se = std::sqrt(m.freq * (1.0 - m.freq) / static_cast<double>(replicates));
    }
    return m;
}

inline double correlation(double sum_x, double sum_y, double sum_xx, double sum_yy, double sum_xy,
                          long long n) {
    if (n < 2) return 0.0;
    const double nn = static_cast<double>(n);
    const double cov = sum_xy - sum_x * sum_y / nn;
    const double var_x = sum_xx - sum_x * sum_x / nn;
    const double var_y = sum_yy - sum_y * sum_y / nn;
    if (var_x <= 0.0 || var_y <= 0.0) return 0.0;
    return cov / std::sqrt(var_x * var_y);
}

}  // namespace detail

/// Full Monte Carlo run: rejection frequencies per procedure, FWER against
/// the scenario's truth labels, and p-value dependence diagnostics.
inline SimulationSummary run_study(const SimulationConfig& config, const TruthLabels& truth,
                                   const std::vector<ProcedureChoice>& procedures =
                                       all_procedures()) {
    config.validate();
    truth.validate();
    const auto results = detail::evaluate_replicates(config, procedures);

    SimulationSummary summary;
    summary.replicates = config.replicates;
    summary.seed = config.seed;
    summary.alpha = config.alpha;
    summary.truth = truth;

    struct Counts {
        unsigned long long i = 0, ii = 0, iii = 0, uni = 0, any = 0, all = 0, fwer = 0;
    };
    std::vector<Counts> counts(procedures.size());
    double sum_i = 0, sum_ii = 0, sum_iii = 0;
    double sum_i2 = 0, sum_ii2 = 0, sum_iii2 = 0;
    double sum_i_ii = 0, sum_i_iii = 0;
    std::array<std::array<unsigned long long, kJointTailGrid.size()>, kJointTailGrid.size()>
        joint_counts{};

    for (const auto& res : results) {
        for (std::size_t j = 0; j < procedures.size(); ++j) {
            const DecisionSet& d = res.decisions[j];
            auto& c = counts[j];
            c.i += d.r_i;
            c.ii += d.r_ii;
            c.iii += d.r_iii;
            c.uni += d.r_union;
            c.any += d.any();
            c.all += d.all();
            c.fwer += (truth.h_i && d.r_i) || (truth.h_ii && d.r_ii) || (truth.h_iii && d.r_iii);
        }
        sum_i += res.p.p_i;
        sum_ii += res.p.p_ii;
        sum_iii += res.p.p_iii;
        sum_i2 += res.p.p_i * res.p.p_i;
        sum_ii2 += res.p.p_ii * res.p.p_ii;
        sum_iii2 += res.p.p_iii * res.p.p_iii;
        sum_i_ii += res.p.p_i * res.p.p_ii;
        sum_i_iii += res.p.p_i * res.p.p_iii;
        for (std::size_t a = 0; a < kJointTailGrid.size(); ++a)
            for (std::size_t b = 0; b < kJointTailGrid.size(); ++b)
                joint_counts[a][b] +=
                    res.p.p_i <= kJointTailGrid[a] && res.p.p_iii <= kJointTailGrid[b];
    }

    for (std::size_t j = 0; j < procedures.size(); ++j) {
        ProcedureSummary ps;
        ps.choice = procedures[j];
        ps.reject_i = detail::make_estimate(counts[j].i, config.replicates);
        ps.reject_ii = detail::make_estimate(counts[j].ii, config.replicates);
        ps.reject_iii = detail::make_estimate(counts[j].iii, config.replicates);
        ps.reject_union = detail::make_estimate(counts[j].uni, config.replicates);
        ps.reject_any = detail::make_estimate(counts[j].any, config.replicates);
        ps.reject_all = detail::make_estimate(counts[j].all, config.replicates);
        ps.fwer = detail::make_estimate(counts[j].fwer, config.replicates);
        summary.procedures.push_back(ps);
    }

    summary.corr_i_ii =
        detail::correlation(sum_i, sum_ii, sum_i2, sum_ii2, sum_i_ii, config.replicates);
    summary.corr_i_iii =
        detail::correlation(sum_i, sum_iii, sum_i2, sum_iii2, sum_i_iii, config.replicates);

    summary.max_joint_excess = -1.0;
    for (std::size_t a = 0; a < kJointTailGrid.size(); ++a) {
        for (std::size_t b = 0; b < kJointTailGrid.size(); ++b) {
            JointTailCell cell;
            cell.p = kJointTailGrid[a];
            cell.q = kJointTailGrid[b];
            const auto est = detail::make_estimate(joint_counts[a][b], config.replicates);
            cell.joint_freq = est.freq;
            cell.excess = est.freq - cell.p * cell.q;
            cell.se = est.se;
            summary.joint_tail.push_back(cell);
            summary.max_joint_excess = std::max(summary.max_joint_excess, cell.excess);
        }
    }
    return summary;
}

/// One p-value triple per replicate, for external plotting.
inline std::vector<PValueSet> pvalue_scatter(const SimulationConfig& config) {
    config.validate();
    const auto results = detail::evaluate_replicates(config, {});
    std::vector<PValueSet> out;
    out.reserve(results.size());
    for (const auto& res : results) out.push_back(res.p);
    return out;
}

/// Named scenarios encoding the simulation design: fig1-null (no exposure
/// difference), fig1-alt (exposure odds ratio 1.75 for test-positives),
/// fig1-b (only H0(i) true; controls' exposure shifted), fig1-c (only H0(ii)
/// true; test-negatives' exposure shifted).
struct Scenario {
    std::string name;
    SimulationConfig config;
    TruthLabels truth;
};

inline Scenario scenario_by_name(const std::string& name) {
    Scenario s;
    s.name = name;
    if (name == "fig1-null") {
        s.truth = {true, true, true};
    } else if (name == "fig1-alt") {
        s.config.exposure_probs[0] = or_to_prob(0.2, 1.75);
        s.truth = {false, false, false};
    } else if (name == "fig1-b") {
        s.config.exposure_probs[2] = 0.3;
        s.truth = {true, false, false};
    } else if (name == "fig1-c") {
        s.config.exposure_probs[1] = 0.3;
        s.truth = {false, true, false};
    } else {
        throw std::invalid_argument("unknown scenario: " + name);
    }
    return s;
}

}  // namespace tnswac
