#pragma once

#include <optional>
#include <stdexcept>

#include "tnswac/exact_tests.hpp"

namespace tnswac {

/// Raw counts from a test-negative study with added controls.
/// Suffix 1 = exposed, 0 = unexposed; P = test-positive, N = test-negative,
/// C = control.
struct StudyCounts {
    long long n_P1 = 0;
    long long n_P0 = 0;
    long long n_N1 = 0;
    long long n_N0 = 0;
    long long n_C1 = 0;
    long long n_C0 = 0;

    long long n_PN1() const { return n_P1 + n_N1; }
    long long n_PN0() const { return n_P0 + n_N0; }
    long long n_PC1() const { return n_P1 + n_C1; }
    long long n_NC1() const { return n_N1 + n_C1; }
    long long n_PNC1() const { return n_P1 + n_N1 + n_C1; }
    long long n_PNC0() const { return n_P0 + n_N0 + n_C0; }
    long long grand_total() const { return n_PNC1() + n_PNC0(); }

    bool valid() const {
        return n_P1 >= 0 && n_P0 >= 0 && n_N1 >= 0 && n_N0 >= 0 && n_C1 >= 0 && n_C0 >= 0;
    }

    void validate() const {
        if (!valid()) throw std::invalid_argument("StudyCounts: negative cell count");
    }

    bool operator==(const StudyCounts&) const = default;
};

/// Hypothesized attributable effects as integer net person counts. A_PN is
/// the net number of persons moved between test-positive and test-negative by
/// exposure (positive toward test-positive), and similarly for A_PC and A_NC.
/// The corresponding theta values are A_PN/n_PN1, A_PC/n_PC1, A_NC/n_NC1.
struct NetEffectCounts {
    long long a_PN = 0;
    long long a_PC = 0;
    long long a_NC = 0;

    bool operator==(const NetEffectCounts&) const = default;
};

/// The three comparison tables: (i) positives vs negatives, (ii) positives vs
/// controls, (iii) pooled tested vs controls.
struct ComparisonTables {
    TwoByTwoTable i;
    TwoByTwoTable ii;
    TwoByTwoTable iii;

    bool operator==(const ComparisonTables&) const = default;
};

inline ComparisonTables comparison_tables(const StudyCounts& counts) {
    counts.validate();
    return ComparisonTables{
        {counts.n_P1, counts.n_P0, counts.n_N1, counts.n_N0},
        {counts.n_P1, counts.n_P0, counts.n_C1, counts.n_C0},
        {counts.n_PN1(), counts.n_PN0(), counts.n_C1, counts.n_C0},
    };
}

/// Comparison tables with exposed cells shifted by the hypothesized net
/// effects; these represent the potential outcomes under no exposure.
/// Unexposed cells are untouched. Returns nullopt when an adjusted cell would
/// go negative, i.e. the effect triple lies outside the parameter space.
inline std::optional<ComparisonTables> adjusted_tables(const StudyCounts& counts,
                                                       const NetEffectCounts& effects) {
    counts.validate();
    const long long p_exposed = counts.n_P1 - effects.a_PN - effects.a_PC;
    const long long n_exposed = counts.n_N1 + effects.a_PN - effects.a_NC;
    const long long c_exposed = counts.n_C1 + effects.a_PC + effects.a_NC;
    const long long pn_exposed = counts.n_PN1() - effects.a_PC - effects.a_NC;
    if (p_exposed < 0 || n_exposed < 0 || c_exposed < 0 || pn_exposed < 0) return std::nullopt;
    return ComparisonTables{
        {p_exposed, counts.n_P0, n_exposed, counts.n_N0},
        {p_exposed, counts.n_P0, c_exposed, counts.n_C0},
        {pn_exposed, counts.n_PN0(), c_exposed, counts.n_C0},
    };
}

/// p-values for the three comparisons plus the Fisher combination of
/// comparisons (i) and (iii).
struct PValueSet {
    double p_i = 1.0;
    double p_ii = 1.0;
    double p_iii = 1.0;
    double p_i_and_iii = 1.0;
};

inline PValueSet compute_pvalues(const ComparisonTables& tables) {
    PValueSet p;
    p.p_i = fisher_exact_two_sided(tables.i);
    p.p_ii = fisher_exact_two_sided(tables.ii);
    p.p_iii = fisher_exact_two_sided(tables.iii);
    p.p_i_and_iii = fisher_combine(p.p_i, p.p_iii);
    return p;
}

}  // namespace tnswac
