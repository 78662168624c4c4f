#include "itmdp/it_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "itmdp/errors.hpp"
#include "itmdp/parallel.hpp"

namespace itmdp::it {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool finite_all(const ItParams& p) {
    for (double v : {p.p_A, p.p_F, p.p_D, p.p_R, p.c_A, p.c_D, p.c_F, p.c_R})
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace

std::vector<std::string> probability_violations(const ItParams& p) {
    std::vector<std::string> out;
    if (!(p.p_A > 0.0 && p.p_A < 1.0))
        out.push_back(fmt::format("p_A = {} violates 0 < p_A < 1", p.p_A));
    if (!(p.p_F > 0.0 && p.p_F < 1.0))
        out.push_back(fmt::format("p_F = {} violates 0 < p_F < 1", p.p_F));
    if (!(p.p_D >= 0.0 && p.p_D < 1.0))
        out.push_back(fmt::format("p_D = {} violates 0 <= p_D < 1", p.p_D));
    if (!(p.p_R > 0.0 && p.p_R <= 1.0))
        out.push_back(fmt::format("p_R = {} violates 0 < p_R <= 1", p.p_R));
    return out;
}

std::vector<std::string> violations(const ItParams& p) {
    auto out = probability_violations(p);
    if (!finite_all(p)) out.push_back("every parameter must be a finite number");
    if (!(p.c_A >= 0.0)) out.push_back(fmt::format("c_A = {} violates c_A >= 0", p.c_A));
    if (!(p.c_D >= 0.0)) out.push_back(fmt::format("c_D = {} violates c_D >= 0", p.c_D));
    if (!(p.c_A < p.c_F))
        out.push_back(fmt::format(
            "c_A = {} and c_F = {} violate c_A < c_F (a failure stage must cost more than an attack "
            "stage)",
            p.c_A, p.c_F));
    if (!(p.c_D < p.c_R))
        out.push_back(fmt::format(
            "c_D = {} and c_R = {} violate c_D < c_R (a reset must cost more than a defend)", p.c_D,
            p.c_R));
    if (!(p.c_R <= p.c_F))
        out.push_back(fmt::format(
            "c_R = {} and c_F = {} violate c_R <= c_F (a failure stage must cost at least a reset)",
            p.c_R, p.c_F));
    return out;
}

void require_valid(const ItParams& params) {
    auto v = violations(params);
    if (!v.empty()) throw InvalidInput(std::move(v));
}

GenericMdp build_mdp(const ItParams& p) {
    require_valid(p);
    GenericMdp m;
    m.state_labels = {"N", "A", "F"};
    m.action_labels = {"W", "D", "R"};

    Matrix wait_p(3, 3), wait_g(3, 3);
    wait_p << 1.0 - p.p_A, p.p_A, 0.0,
              0.0, 1.0 - p.p_F, p.p_F,
              0.0, 0.0, 1.0;
    wait_g << 0.0, 0.0, 0.0,
              p.c_A, p.c_A, p.c_A,
              p.c_F, p.c_F, p.c_F;

    Matrix defend_p(3, 3), defend_g(3, 3);
    defend_p << 1.0 - p.p_A, p.p_A, 0.0,
                p.p_D, (1.0 - p.p_D) * (1.0 - p.p_F), (1.0 - p.p_D) * p.p_F,
                0.0, 0.0, 1.0;
    // A disrupted attack (A -> N) carries only the defend cost.
    defend_g << p.c_D, p.c_D, p.c_D,
                p.c_D, p.c_A + p.c_D, p.c_A + p.c_D,
                p.c_F + p.c_D, p.c_F + p.c_D, p.c_F + p.c_D;

    Matrix reset_p(3, 3), reset_g(3, 3);
    reset_p << 1.0, 0.0, 0.0,
               1.0, 0.0, 0.0,
               p.p_R, 0.0, 1.0 - p.p_R;
    reset_g << p.c_R, p.c_R, p.c_R,
               p.c_R, p.c_R, p.c_R,
               p.c_R, p.c_R, p.c_F + p.c_R;

    m.transition = {wait_p, defend_p, reset_p};
    m.cost = {wait_g, defend_g, reset_g};
    m.maintenance = std::vector<Matrix>{Matrix::Zero(3, 3), Matrix::Constant(3, 3, p.c_D),
                                        Matrix::Constant(3, 3, p.c_R)};
    return m;
}

char letter(Candidate c) {
    switch (c) {
        case Candidate::wait: return 'W';
        case Candidate::defend: return 'D';
        case Candidate::reset: return 'R';
    }
    return '?';
}

std::string_view name(Candidate c) {
    switch (c) {
        case Candidate::wait: return "wait-under-attack";
        case Candidate::defend: return "defend-under-attack";
        case Candidate::reset: return "reset-under-attack";
    }
    return "?";
}

StationaryPolicy policy_of(Candidate c) {
    return StationaryPolicy{{W, static_cast<std::size_t>(c), R}};
}

double wait_numerator(const ItParams& p) {
    return p.p_A * (p.p_R * p.c_A + p.p_F * (1.0 - p.p_R) * p.c_F + p.p_F * p.c_R);
}

double wait_denominator(const ItParams& p) {
    return p.p_A * p.p_F + p.p_R * (p.p_A + p.p_F);
}

double lambda_wait(const ItParams& p) { return wait_numerator(p) / wait_denominator(p); }

namespace {

double defend_denominator(const ItParams& p) {
    return wait_denominator(p) + p.p_D * (p.p_R * (1.0 - p.p_F) - p.p_F * p.p_A);
}

}  // namespace

double lambda_defend(const ItParams& p) {
    return (wait_numerator(p) * (1.0 - p.p_D) + p.p_A * p.p_R * p.c_D) / defend_denominator(p);
}

double lambda_reset(const ItParams& p) { return p.p_A * p.c_R / (1.0 + p.p_A); }

double lambda_of(const ItParams& p, Candidate c) {
    switch (c) {
        case Candidate::wait: return lambda_wait(p);
        case Candidate::defend: return lambda_defend(p);
        case Candidate::reset: return lambda_reset(p);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

Decomposition decompose(const ItParams& p, Candidate c) {
    // Failure-channel part of the wait numerator: the c_A and c_F terms.
    const double risk = p.p_A * (p.p_R * p.c_A + p.p_F * (1.0 - p.p_R) * p.c_F);
    const double reset_overhead = p.p_A * p.p_F * p.c_R;
    switch (c) {
        case Candidate::wait: {
            const double q = wait_denominator(p);
            return {reset_overhead / q, risk / q};
        }
        case Candidate::defend: {
            const double q = defend_denominator(p);
            return {((1.0 - p.p_D) * reset_overhead + p.p_A * p.p_R * p.c_D) / q,
                    (1.0 - p.p_D) * risk / q};
        }
        case Candidate::reset:
            return {lambda_reset(p), 0.0};
    }
    return {};
}

double mttf(const ItParams& p, Candidate c) {
    switch (c) {
        case Candidate::wait: return 1.0 + 1.0 / p.p_A + 1.0 / p.p_F;
        case Candidate::defend:
            return 1.0 + 1.0 / p.p_A + (p.p_A + p.p_D) / (p.p_A * p.p_F * (1.0 - p.p_D));
        case Candidate::reset: return kInf;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

PolicyTriple evaluate_triple(const ItParams& params) {
    require_valid(params);
    PolicyTriple t;
    t.g_wait = wait_numerator(params);
    t.q_wait = wait_denominator(params);
    for (Candidate c : kCandidates) {
        const auto k = static_cast<std::size_t>(c);
        t.lambda[k] = lambda_of(params, c);
        t.decomposition[k] = decompose(params, c);
        t.mttf[k] = mttf(params, c);
    }
    const double best = *std::min_element(t.lambda.begin(), t.lambda.end());
    for (Candidate c : kCandidates)
        if (t.lambda_of(c) <= best + kTieTol) t.optimal.push_back(c);
    t.recommended = t.optimal.front();
    return t;
}

namespace {

Inequality make_inequality(double lhs, double rhs) {
    return {lhs, rhs, rhs - lhs, lhs < rhs};
}

}  // namespace

Comparison compare(const ItParams& p) {
    require_valid(p);
    const double risk = p.p_R * p.c_A + p.p_F * (1.0 - p.p_R) * p.c_F;
    Comparison out;
    out.wait_below_reset = make_inequality((1.0 + p.p_A) * risk,
                                           (p.p_R * (p.p_A + p.p_F) - p.p_F) * p.c_R);
    out.wait_below_defend = make_inequality((1.0 + p.p_A) * p.p_D * (risk + p.p_F * p.c_R),
                                            wait_denominator(p) * p.c_D);
    out.defend_below_reset = make_inequality(
        (1.0 + p.p_A) * ((1.0 - p.p_D) * risk + p.p_R * p.c_D),
        (p.p_R * (p.p_A + p.p_D) - p.p_F * (1.0 - p.p_D) * (1.0 - p.p_R)) * p.c_R);
    return out;
}

std::string_view name(Sufficiency s) {
    switch (s) {
        case Sufficiency::insufficient: return "insufficient";
        case Sufficiency::weak: return "weak";
        case Sufficiency::strong: return "strong";
    }
    return "?";
}

std::string_view name(DefendEffectiveness e) {
    switch (e) {
        case DefendEffectiveness::lowly: return "lowly";
        case DefendEffectiveness::nominally: return "nominally";
        case DefendEffectiveness::highly: return "highly";
    }
    return "?";
}

Thresholds thresholds(const ItParams& p) {
    Thresholds t;
    const double slow = p.p_F * (1.0 - p.p_D);
    const double a = p.p_F * (2.0 + p.p_A);
    t.basic_weak = slow / (slow + p.p_A + p.p_D);
    t.basic_strong = p.p_F / (p.p_F + p.p_A);
    t.refined_weak = a * (1.0 - p.p_D) / (a * (1.0 - p.p_D) + p.p_A + p.p_D);
    t.refined_strong = a / (a + p.p_A);
    const double denom = a * (1.0 - p.p_D) + (p.p_D * (2.0 + p.p_A) - 1.0);
    t.z2_exceeds_one = denom > 0.0 ? a * (1.0 - p.p_D) / denom : kInf;
    t.lowly_cutoff = 1.0 / (2.0 + p.p_A);
    t.highly_cutoff = 0.5;
    return t;
}

namespace {

// Boundary in (0,1) only when its denominator is positive and it sits
// strictly below one.
bool beyond_one(double numerator, double denominator) {
    return !(denominator > 0.0 && numerator < denominator);
}

}  // namespace

SufficiencyClass classify_sufficiency(const ItParams& p, bool refined) {
    if (auto v = probability_violations(p); !v.empty()) throw InvalidInput(std::move(v));
    SufficiencyClass out;
    out.refined = refined;
    out.bounds = thresholds(p);
    const double strong = refined ? out.bounds.refined_strong : out.bounds.basic_strong;
    const double weak = refined ? out.bounds.refined_weak : out.bounds.basic_weak;
    out.cls = p.p_R > strong ? Sufficiency::strong
              : p.p_R > weak ? Sufficiency::weak
                             : Sufficiency::insufficient;

    const double lag = p.p_F * (1.0 - p.p_R);
    out.x1_exceeds_one = beyond_one((1.0 + p.p_A) * lag * (1.0 - p.p_D),
                                    p.p_R * (p.p_A + p.p_D) - lag * (1.0 - p.p_D));
    out.x2_exceeds_one = beyond_one((1.0 + p.p_A) * lag, p.p_R * (p.p_A + p.p_F) - p.p_F);
    out.z2_exceeds_one = partition_geometry(p).z2 > 1.0;

    out.defend = p.p_D < out.bounds.lowly_cutoff    ? DefendEffectiveness::lowly
                 : p.p_D > out.bounds.highly_cutoff ? DefendEffectiveness::highly
                                                    : DefendEffectiveness::nominally;
    return out;
}

PartitionGeometry partition_geometry(const ItParams& p) {
    if (auto v = probability_violations(p); !v.empty()) throw InvalidInput(std::move(v));
    const double pa = p.p_A, pf = p.p_F, pd = p.p_D, pr = p.p_R;
    const double q = pa * pf + pr * (pa + pf);
    const double a = pf * (2.0 + pa);

    PartitionGeometry g;
    g.y0 = (1.0 + pa) * pf * pd / (pa + pf * (1.0 + pa));
    g.y1 = (1.0 + pa) * pf * pd * (1.0 - pr) / q;
    g.y2 = (1.0 + pa) * pf * pd * (2.0 - pr) / q;
    g.y3 = (pr * (pa + pd) - a * (1.0 - pd) * (1.0 - pr)) / ((1.0 + pa) * pr);
    g.x1 = (1.0 + pa) * pf * (1.0 - pd) * (1.0 - pr) /
           (pr * (pa + pd) - pf * (1.0 - pd) * (1.0 - pr));
    g.x2 = (1.0 + pa) * pf * (1.0 - pr) / (pr * (pa + pf) - pf);
    g.z1 = (pa * pr - a * (1.0 - pr)) / ((1.0 + pa) * pr);
    g.z2 = (pr * (pa + pd) - a * (1.0 - pd) * (1.0 - pr)) / ((1.0 + pa) * (1.0 - pd) * pr);
    g.m1 = (pr * (pa + pd) - pf * (1.0 - pd) * (1.0 - pr)) / ((1.0 + pa) * pr);

    g.meet_ca = pa / (1.0 + pa);
    g.meet_cd = pd;
    g.junction_low = {g.x2, pd * g.x2, 0.0};
    g.junction_high = {1.0, pd, g.z1};

    auto outside = [](double v) { return !(v > 0.0 && v < 1.0); };
    g.x1_outside_unit = outside(g.x1);
    g.x2_outside_unit = outside(g.x2);
    g.z2_outside_unit = outside(g.z2);
    return g;
}

std::optional<Plane> parse_plane(std::string_view text) {
    if (text == "cA-cD") return Plane::attack_defend_over_reset;
    if (text == "cR-cD") return Plane::reset_defend_over_failure;
    if (text == "3d") return Plane::full_over_failure;
    return std::nullopt;
}

std::string_view name(Plane p) {
    switch (p) {
        case Plane::attack_defend_over_reset: return "cA-cD";
        case Plane::reset_defend_over_failure: return "cR-cD";
        case Plane::full_over_failure: return "3d";
    }
    return "?";
}

std::string_view name(Region r) {
    switch (r) {
        case Region::wait: return "W";
        case Region::defend: return "D";
        case Region::reset: return "R";
        case Region::tie: return "tie";
        case Region::invalid: return "invalid";
    }
    return "?";
}

std::vector<std::string> plane_mismatch(const ItParams& p, Plane plane) {
    std::vector<std::string> out;
    switch (plane) {
        case Plane::attack_defend_over_reset:
            if (p.p_R != 1.0)
                out.push_back(fmt::format("plane cA-cD requires p_R = 1 (got {})", p.p_R));
            if (!(p.c_R > 0.0 && std::isfinite(p.c_R)))
                out.push_back("plane cA-cD requires a positive reset cost c_R as the scale");
            if (!(p.c_R <= p.c_F))
                out.push_back("plane cA-cD requires c_R <= c_F");
            break;
        case Plane::reset_defend_over_failure:
            if (p.c_A != 0.0)
                out.push_back(fmt::format("plane cR-cD requires c_A = 0 (got {})", p.c_A));
            [[fallthrough]];
        case Plane::full_over_failure:
            if (!(p.c_F > 0.0 && std::isfinite(p.c_F)))
                out.push_back(fmt::format("plane {} requires a positive failure cost c_F as the scale",
                                          name(plane)));
            break;
    }
    return out;
}

std::vector<SweepCell> partition_sweep(const ItParams& params, Plane plane, std::size_t resolution) {
    if (resolution < 2)
        throw InvalidInput({fmt::format("grid resolution must be at least 2 (got {})", resolution)});
    if (auto v = probability_violations(params); !v.empty()) throw InvalidInput(std::move(v));
    if (auto v = plane_mismatch(params, plane); !v.empty()) throw InvalidInput(std::move(v));

    const bool three_d = plane == Plane::full_over_failure;
    const std::size_t layers = three_d ? resolution : 1;
    const std::size_t per_layer = resolution * resolution;
    const double step = 1.0 / static_cast<double>(resolution - 1);
    auto coord = [&](std::size_t k) {
        return k + 1 == resolution ? 1.0 : static_cast<double>(k) * step;
    };

    std::vector<SweepCell> cells(layers * per_layer);
    parallel_for(cells.size(), [&](std::size_t idx) {
        const std::size_t ix = idx % resolution;
        const std::size_t iy = (idx / resolution) % resolution;
        const std::size_t iz = idx / per_layer;
        SweepCell& cell = cells[idx];
        cell.x = coord(ix);
        cell.y = coord(iy);
        if (three_d) cell.z = coord(iz);

        ItParams p = params;
        switch (plane) {
            case Plane::attack_defend_over_reset:
                p.c_A = cell.x * params.c_R;
                p.c_D = cell.y * params.c_R;
                break;
            case Plane::reset_defend_over_failure:
                p.c_R = cell.x * params.c_F;
                p.c_D = cell.y * params.c_F;
                break;
            case Plane::full_over_failure:
                p.c_R = cell.x * params.c_F;
                p.c_D = cell.y * params.c_F;
                p.c_A = *cell.z * params.c_F;
                break;
        }
        if (!violations(p).empty()) {
            cell.region = Region::invalid;
            cell.lambda.fill(std::numeric_limits<double>::quiet_NaN());
            cell.margin = std::numeric_limits<double>::quiet_NaN();
            return;
        }
        const PolicyTriple t = evaluate_triple(p);
        cell.lambda = t.lambda;
        cell.optimal = t.optimal;
        cell.region = t.tie() ? Region::tie : static_cast<Region>(t.recommended);
        auto sorted = t.lambda;
        std::sort(sorted.begin(), sorted.end());
        cell.margin = sorted[1] - sorted[0];
    });
    return cells;
}

}  // namespace itmdp::it
