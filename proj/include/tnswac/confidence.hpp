#pragma once

#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "tnswac/procedures.hpp"

namespace tnswac {

enum class Membership { member, non_member, infeasible };

/// The paper excludes an effect triple only when all three comparisons reject
/// (the product rule). The tighter any-rejection rule is available as a
/// clearly-labeled extension.
enum class ExclusionRule { product, any_rejection };

inline std::string to_string(ExclusionRule r) {
    return r == ExclusionRule::product ? "product" : "any_rejection";
}

/// Raised when the requested lattice exceeds the evaluation budget; the
/// message suggests a larger stride.
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfidenceSetOptions {
    double alpha = 0.05;
    Procedure procedure = Procedure::method2;
    Method2Variant variant = Method2Variant::example_consistent;
    ExclusionRule rule = ExclusionRule::product;
    long long stride = 1;
    unsigned long long budget = 100'000'000ULL;
    bool emit_members = false;
    std::size_t member_cap = 1'000'000;
};

/// Per-coordinate projection of the set: [lo, hi] over the integer A-counts,
/// with the denominator that converts them to exact theta ratios.
struct AxisProjection {
    long long lo = 0;
    long long hi = 0;
    long long denom = 0;  // theta = A / denom; denom 0 forces A = 0

    double theta_lo() const { return denom == 0 ? 0.0 : static_cast<double>(lo) / denom; }
    double theta_hi() const { return denom == 0 ? 0.0 : static_cast<double>(hi) / denom; }
};

struct ConfidenceSet {
    double alpha = 0.05;
    Procedure procedure = Procedure::method2;
    Method2Variant variant = Method2Variant::example_consistent;
    ExclusionRule rule = ExclusionRule::product;
    long long stride = 1;
    bool empty = true;
    AxisProjection proj_PN;
    AxisProjection proj_PC;
    AxisProjection proj_NC;
    unsigned long long feasible_evaluated = 0;
    unsigned long long infeasible_skipped = 0;
    std::vector<NetEffectCounts> members;
    bool members_truncated = false;

    bool contains_in_projections(const NetEffectCounts& e) const {
        return !empty && e.a_PN >= proj_PN.lo && e.a_PN <= proj_PN.hi && e.a_PC >= proj_PC.lo &&
               e.a_PC <= proj_PC.hi && e.a_NC >= proj_NC.lo && e.a_NC <= proj_NC.hi;
    }
};

namespace detail {

inline bool excluded(const DecisionSet& d, ExclusionRule rule) {
    return rule == ExclusionRule::product ? d.all() : d.any();
}

// Memo for exact-test p-values during a lattice scan. The unexposed cells of
// every adjusted table are fixed, so a table is identified by its two exposed
// cells.
class PValueMemo {
public:
    PValueMemo(long long row1_unexposed, long long row2_unexposed)
        : b_(row1_unexposed), d_(row2_unexposed) {}

    double operator()(long long exposed1, long long exposed2) {
        const std::uint64_t key =
            (static_cast<std::uint64_t>(exposed1) << 32) ^ static_cast<std::uint64_t>(exposed2);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        const double p = fisher_exact_two_sided({exposed1, b_, exposed2, d_});
        cache_.emplace(key, p);
        return p;
    }

private:
    long long b_;
    long long d_;
    std::unordered_map<std::uint64_t, double> cache_;
};

}  // namespace detail

/// Decides whether one effect triple belongs to the confidence set: build the
/// adjusted tables, compute the three p-values, run the procedure, and keep
/// the point unless the exclusion rule fires.
inline Membership confset_membership(const StudyCounts& counts, const NetEffectCounts& effects,
                                     double alpha, Procedure proc,
                                     Method2Variant variant = Method2Variant::example_consistent,
                                     ExclusionRule rule = ExclusionRule::product) {
    const auto tables = adjusted_tables(counts, effects);
    if (!tables) return Membership::infeasible;
    const DecisionSet d = run_procedure(compute_pvalues(*tables), alpha, proc, variant);
    return detail::excluded(d, rule) ? Membership::non_member : Membership::member;
}

/// Scans the integer lattice of feasible effect triples (multiples of stride,
/// centered at the origin) and collects the non-rejected points. Deterministic
/// in its inputs; the scan order never affects the result.
inline ConfidenceSet confidence_set(const StudyCounts& counts, const ConfidenceSetOptions& opt) {
    counts.validate();
    detail::check_alpha(opt.alpha);
    if (opt.stride < 1) throw std::invalid_argument("stride must be >= 1");

    const long long max_PN = counts.n_PN1();
    const long long max_PC = counts.n_PC1();
    const long long max_NC = counts.n_NC1();

    const auto axis_points = [&](long long m) {
        return static_cast<unsigned long long>(2 * (m / opt.stride) + 1);
    };
    const unsigned long long lattice_size =
        axis_points(max_PN) * axis_points(max_PC) * axis_points(max_NC);
    if (lattice_size > opt.budget)
        throw BudgetError("confidence_set: lattice of " + std::to_string(lattice_size) +
                          " points exceeds budget " + std::to_string(opt.budget) +
                          "; increase --stride or --budget");

    ConfidenceSet set;
    set.alpha = opt.alpha;
    set.procedure = opt.procedure;
    set.variant = opt.variant;
    set.rule = opt.rule;
    set.stride = opt.stride;
    set.proj_PN.denom = max_PN;
    set.proj_PC.denom = max_PC;
    set.proj_NC.denom = max_NC;

    detail::PValueMemo memo_i(counts.n_P0, counts.n_N0);
    detail::PValueMemo memo_ii(counts.n_P0, counts.n_C0);
    detail::PValueMemo memo_iii(counts.n_PN0(), counts.n_C0);

    const auto note_member = [&](const NetEffectCounts& e) {
        if (set.empty) {
            set.proj_PN.lo = set.proj_PN.hi = e.a_PN;
            set.proj_PC.lo = set.proj_PC.hi = e.a_PC;
            set.proj_NC.lo = set.proj_NC.hi = e.a_NC;
            set.empty = false;
        } else {
            set.proj_PN.lo = std::min(set.proj_PN.lo, e.a_PN);
            set.proj_PN.hi = std::max(set.proj_PN.hi, e.a_PN);
            set.proj_PC.lo = std::min(set.proj_PC.lo, e.a_PC);
            set.proj_PC.hi = std::max(set.proj_PC.hi, e.a_PC);
            set.proj_NC.lo = std::min(set.proj_NC.lo, e.a_NC);
            set.proj_NC.hi = std::max(set.proj_NC.hi, e.a_NC);
        }
        if (opt.emit_members) {
            if (set.members.size() < opt.member_cap)
                set.members.push_back(e);
            else
                set.members_truncated = true;
        }
    };

    for (long long a_PC = -(max_PC / opt.stride) * opt.stride; a_PC <= max_PC;
         a_PC += opt.stride) {
        for (long long a_NC = -(max_NC / opt.stride) * opt.stride; a_NC <= max_NC;
             a_NC += opt.stride) {
            const long long c_exposed = counts.n_C1 + a_PC + a_NC;
            const long long pn_exposed = counts.n_PN1() - a_PC - a_NC;
            const long long a_PN_span = max_PN / opt.stride;
            if (c_exposed < 0 || pn_exposed < 0) {
                set.infeasible_skipped +=
                    static_cast<unsigned long long>(2 * a_PN_span + 1);
                continue;
            }
            const double p_iii = memo_iii(pn_exposed, c_exposed);
            for (long long a_PN = -a_PN_span * opt.stride; a_PN <= max_PN; a_PN += opt.stride) {
                const long long p_exposed = counts.n_P1 - a_PN - a_PC;
                const long long n_exposed = counts.n_N1 + a_PN - a_NC;
                if (p_exposed < 0 || n_exposed < 0) {
                    ++set.infeasible_skipped;
                    continue;
                }
                ++set.feasible_evaluated;
                PValueSet p;
                p.p_i = memo_i(p_exposed, n_exposed);
                p.p_ii = memo_ii(p_exposed, c_exposed);
                p.p_iii = p_iii;
                p.p_i_and_iii = fisher_combine(p.p_i, p.p_iii);
                const DecisionSet d = run_procedure(p, opt.alpha, opt.procedure, opt.variant);
                if (!detail::excluded(d, opt.rule)) note_member({a_PN, a_PC, a_NC});
            }
        }
    }
    return set;
}

}  // namespace tnswac