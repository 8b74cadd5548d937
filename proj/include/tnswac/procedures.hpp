#pragma once

#include <stdexcept>
#include <string>

#include "tnswac/study_model.hpp"

namespace tnswac {

enum class Procedure { standard, method1, method2 };

/// Method 2's step (3) can be read two ways: the written steps test H0(i) and
/// H0(iii) each at level lambda, while the paper's worked example requires
/// level alpha when lambda = alpha/2. Both readings control the familywise
/// error rate; example_consistent is the default.
enum class Method2Variant { strict_lambda, example_consistent };

inline std::string to_string(Procedure p) {
    switch (p) {
        case Procedure::standard: return "standard";
        case Procedure::method1: return "method1";
        case Procedure::method2: return "method2";
    }
    throw std::logic_error("unknown procedure");
}

inline std::string to_string(Method2Variant v) {
    return v == Method2Variant::strict_lambda ? "strict_lambda" : "example_consistent";
}

/// Per-hypothesis rejection decisions plus the procedure trace.
struct DecisionSet {
    bool r_i = false;
    bool r_ii = false;
    bool r_iii = false;
    bool r_union = false;  // rejection of H0(i) and (iii) jointly, Method 2 only
    double lambda = 0.0;
    double alpha = 0.0;
    Procedure procedure = Procedure::standard;
    Method2Variant variant = Method2Variant::example_consistent;

    bool any() const { return r_i || r_ii || r_iii; }
    bool all() const { return r_i && r_ii && r_iii; }
};

namespace detail {
inline void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha must lie in (0,1)");
}
}  // namespace detail

/// Bonferroni baseline: comparisons (i) and (ii) each at level alpha/2;
/// hypothesis (iii) is not tested.
inline DecisionSet standard_bonferroni(const PValueSet& p, double alpha) {
    detail::check_alpha(alpha);
    DecisionSet d;
    d.alpha = alpha;
    d.lambda = alpha / 2;
    d.procedure = Procedure::standard;
    d.r_i = p.p_i <= alpha / 2;
    d.r_ii = p.p_ii <= alpha / 2;
    return d;
}

/// Gatekeeping: test (i) and (ii) at alpha/2; only if both reject, test (iii)
/// at full level alpha.
inline DecisionSet method1(const PValueSet& p, double alpha) {
    detail::check_alpha(alpha);
    DecisionSet d;
    d.alpha = alpha;
    d.lambda = alpha / 2;
    d.procedure = Procedure::method1;
    d.r_i = p.p_i <= alpha / 2;
    d.r_ii = p.p_ii <= alpha / 2;
    d.r_iii = d.r_i && d.r_ii && p.p_iii <= alpha;
    return d;
}

/// The four-step procedure built around the Fisher combination of the
/// essentially independent comparisons (i) and (iii).
inline DecisionSet method2(const PValueSet& p, double alpha,
                           Method2Variant variant = Method2Variant::example_consistent) {
    detail::check_alpha(alpha);
    DecisionSet d;
    d.alpha = alpha;
    d.procedure = Procedure::method2;
    d.variant = variant;

    // Step 1: test H0(ii) at alpha/2 and pick lambda.
    d.r_ii = p.p_ii <= alpha / 2;
    d.lambda = d.r_ii ? alpha : alpha / 2;

    // Step 2: test the union hypothesis via the combination p-value.
    d.r_union = p.p_i_and_iii <= d.lambda;
    if (!d.r_union) return d;

    // Step 3: test H0(i) and H0(iii) individually.
    const double level = variant == Method2Variant::strict_lambda ? d.lambda : alpha;
    d.r_i = p.p_i <= level;
    d.r_iii = p.p_iii <= level;

    // Step 4: a second chance for H0(ii) at full level.
    if (!d.r_ii && d.r_i && d.r_iii) d.r_ii = p.p_ii <= alpha;
    return d;
}

inline DecisionSet run_procedure(const PValueSet& p, double alpha, Procedure proc,
                                 Method2Variant variant = Method2Variant::example_consistent) {
    switch (proc) {
        case Procedure::standard: return standard_bonferroni(p, alpha);
        case Procedure::method1: return method1(p, alpha);
        case Procedure::method2: return method2(p, alpha, variant);
    }
    throw std::logic_error("unknown procedure");
}

}  // namespace tnswac
