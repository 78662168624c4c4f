#pragma once

// Three-state intrusion-tolerance model.
//
// States: N (operating normally), A (under attack), F (security failure).
// Actions: W (wait), D (defend), R (reset).
//
// Only three policies can be optimal. All of them wait in N and reset in F;
// they differ in the action taken under attack:
//   wait-under-attack    mu^W = (W, W, R)
//   defend-under-attack  mu^D = (W, D, R)
//   reset-under-attack   mu^R = (W, R, R)
// This header gives their average costs in closed form, the polynomial
// comparisons between them, the reset-reliability thresholds, and the
// boundary quantities of the optimal-policy partition in normalized cost
// space.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "itmdp/mdp_core.hpp"

namespace itmdp::it {

enum State : std::size_t { N = 0, A = 1, F = 2 };
enum Action : std::size_t { W = 0, D = 1, R = 2 };

struct ItParams {
    double p_A = 0.0;  // attack initiation per stage
    double p_F = 0.0;  // attack completion per stage
    double p_D = 0.0;  // defend success; 0 = useless defend
    double p_R = 1.0;  // reset success from F; 1 = fully reliable reset
    double c_A = 0.0;  // per-stage attack cost
    double c_D = 0.0;  // defend cost
    double c_F = 0.0;  // per-stage failure cost
    double c_R = 0.0;  // reset cost

    friend bool operator==(const ItParams&, const ItParams&) = default;
};

/// Constraint violations on the probabilities alone.
std::vector<std::string> probability_violations(const ItParams& params);

/// Every violated constraint, each message naming the constraint.
std::vector<std::string> violations(const ItParams& params);

/// Throws InvalidInput if any constraint is violated.
void require_valid(const ItParams& params);

/// The 3-state, 3-action MDP with maintenance channel tagged on the c_D and
/// c_R terms and the failure channel on c_A and c_F.
GenericMdp build_mdp(const ItParams& params);

enum class Candidate : std::size_t { wait = 0, defend = 1, reset = 2 };

inline constexpr std::array<Candidate, 3> kCandidates{Candidate::wait, Candidate::defend,
                                                     Candidate::reset};

/// W, D or R.
char letter(Candidate c);

/// "wait-under-attack", "defend-under-attack", "reset-under-attack".
std::string_view name(Candidate c);

/// The stationary policy on build_mdp's state/action indices.
StationaryPolicy policy_of(Candidate c);

double lambda_wait(const ItParams& params);
double lambda_defend(const ItParams& params);
double lambda_reset(const ItParams& params);
double lambda_of(const ItParams& params, Candidate c);

/// Numerator and denominator of lambda_wait.
double wait_numerator(const ItParams& params);
double wait_denominator(const ItParams& params);

struct Decomposition {
    double maintenance = 0.0;  // terms carrying c_D or c_R
    double failure = 0.0;      // terms carrying c_A or c_F
};

Decomposition decompose(const ItParams& params, Candidate c);

/// Expected stages from entering N until first entering F, counting both
/// the entry stage and the stage in which F is entered. +inf for mu^R.
double mttf(const ItParams& params, Candidate c);

struct PolicyTriple {
    std::array<double, 3> lambda{};
    double g_wait = 0.0;  // numerator of lambda_wait
    double q_wait = 0.0;  // denominator of lambda_wait
    std::array<Decomposition, 3> decomposition{};
    std::array<double, 3> mttf{};
    std::vector<Candidate> optimal;  // every candidate within kTieTol of the minimum
    Candidate recommended = Candidate::wait;  // first of `optimal` in order W, D, R

    bool tie() const { return optimal.size() > 1; }
    double lambda_of(Candidate c) const { return lambda[static_cast<std::size_t>(c)]; }
    double best_lambda() const { return lambda_of(recommended); }
};

PolicyTriple evaluate_triple(const ItParams& params);

/// One of the three pairwise comparisons written in polynomial form
/// lhs < rhs. margin = rhs - lhs; holds iff margin > 0.
struct Inequality {
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    bool holds = false;
};

struct Comparison {
    Inequality wait_below_reset;   // lambda^W < lambda^R
    Inequality wait_below_defend;  // lambda^W < lambda^D
    Inequality defend_below_reset; // lambda^D < lambda^R
};

Comparison compare(const ItParams& params);

enum class Sufficiency { insufficient, weak, strong };
enum class DefendEffectiveness { lowly, nominally, highly };

std::string_view name(Sufficiency s);
std::string_view name(DefendEffectiveness e);

/// Reset-reliability thresholds. All depend on the probabilities only.
struct Thresholds {
    double basic_weak = 0.0;     // p_F(1-p_D) / (p_F(1-p_D) + p_A + p_D)
    double basic_strong = 0.0;   // p_F / (p_F + p_A)
    double refined_weak = 0.0;   // p_F(2+p_A)(1-p_D) / (p_F(2+p_A)(1-p_D) + p_A + p_D)
    double refined_strong = 0.0; // p_F(2+p_A) / (p_F(2+p_A) + p_A)
    double z2_exceeds_one = 0.0; // p_R bound above which z2 > 1; +inf when unattainable
    double lowly_cutoff = 0.0;   // 1 / (2 + p_A)
    double highly_cutoff = 0.5;
};

Thresholds thresholds(const ItParams& params);

struct SufficiencyClass {
    Sufficiency cls = Sufficiency::insufficient;
    bool refined = false;
    Thresholds bounds;
    bool x1_exceeds_one = false;  // defend-vs-reset boundary lies beyond c_R/c_F = 1
    bool x2_exceeds_one = false;  // wait-vs-reset boundary lies beyond c_R/c_F = 1
    bool z2_exceeds_one = false;
    DefendEffectiveness defend = DefendEffectiveness::lowly;
};

/// Classifies p_R against the basic thresholds, or the refined ones when
/// `refined` is set. Costs are ignored.
SufficiencyClass classify_sufficiency(const ItParams& params, bool refined);

struct Point3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

struct PartitionGeometry {
    double y0 = 0.0, y1 = 0.0, y2 = 0.0, y3 = 0.0;
    double x1 = 0.0, x2 = 0.0;
    double z1 = 0.0, z2 = 0.0;
    double m1 = 0.0;
    // Meeting point of the three regions in the (c_A/c_R, c_D/c_R) plane.
    double meet_ca = 0.0, meet_cd = 0.0;
    // Points where the three planes intersect in (c_R/c_F, c_D/c_F, c_A/c_F).
    Point3 junction_low;   // (x2, p_D x2, 0)
    Point3 junction_high;  // (1, p_D, z1)
    bool x1_outside_unit = false;
    bool x2_outside_unit = false;
    bool z2_outside_unit = false;
};

PartitionGeometry partition_geometry(const ItParams& params);

enum class Plane {
    attack_defend_over_reset,   // (c_A/c_R, c_D/c_R), needs p_R = 1
    reset_defend_over_failure,  // (c_R/c_F, c_D/c_F), needs c_A = 0
    full_over_failure,          // (c_R/c_F, c_D/c_F, c_A/c_F)
};

/// Parses "cA-cD", "cR-cD" or "3d".
std::optional<Plane> parse_plane(std::string_view text);
std::string_view name(Plane p);

enum class Region { wait, defend, reset, tie, invalid };

std::string_view name(Region r);

struct SweepCell {
    double x = 0.0, y = 0.0;
    std::optional<double> z;
    Region region = Region::invalid;
    std::array<double, 3> lambda{};
    std::vector<Candidate> optimal;
    double margin = 0.0;  // second-best lambda minus best lambda
};

/// Labels every point of an inclusive grid with `resolution` points per axis
/// over [0, 1]. Row-major: x varies fastest, then y, then z. Cells outside
/// the admissible cost region keep region = invalid.
///
/// Throws InvalidInput when resolution < 2, the probabilities are invalid,
/// or the parameters do not match the plane.
std::vector<SweepCell> partition_sweep(const ItParams& params, Plane plane, std::size_t resolution);

/// Parameter complaints that make a plane unusable; empty when it applies.
std::vector<std::string> plane_mismatch(const ItParams& params, Plane plane);

}  // namespace itmdp::it
