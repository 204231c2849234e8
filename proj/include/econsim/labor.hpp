#pragma once

#include <span>
#include <vector>

#include "econsim/agent.hpp"
#include "econsim/config.hpp"
#include "econsim/rng.hpp"

namespace econsim {

struct StudyOutcome {
    double education_gain = 0.0;
    Currency fee;
    Level energy_spent;
    Level satiety_spent;
};

/// H += eta * hours, fee and physiological costs per the activity table.
/// Reading needs the configured item in inventory (it is not consumed).
StudyOutcome study(AgentState& agent, StudyKind kind, Duration duration, const WorldConfig& cfg);

/// Smallest score h in `scores` with F(h) >= p, F the empirical CDF.
/// `scores` need not be sorted. Throws EmptyPopulation.
double empirical_quantile(std::span<const double> scores, double p);
/// Same, on scores already sorted ascending.
double empirical_quantile_sorted(std::span<const double> sorted, double p);

/// max(floor, q_{1 - share}) over the population's scores.
double dynamic_threshold(double floor, double eligibility_share, std::span<const double> scores);
double dynamic_threshold(const OccupationSpec& occ, const WorldConfig& cfg, std::span<const double> scores);

bool eligibility(const AgentState& agent, const OccupationSpec& occ, double threshold);

/// Wage premium on the effective threshold; 1 when beta is 0.
double phi(const OccupationSpec& occ, double threshold);

struct Assignment {
    AgentId agent = 0;
    OccupationId occupation;
    std::optional<OccupationId> previous;
    double education = 0.0;
    int residential_tier = 1;
    double threshold = 0.0;
};

struct RecruitmentState {
    int cycle_index = 0;
    std::vector<double> thresholds;                       // per occupation
    std::vector<std::vector<OccupationId>> applications;  // per agent, after truncation
    std::vector<Assignment> assignments;                  // this cycle
    std::vector<int> open_vacancies;                      // per occupation, after filling
};

/// Recomputes thresholds over all agents, truncates each agent's applications
/// to its quota, then fills vacancies highest tier first, ranking by H
/// (descending) then agent id. An agent is placed at most once per cycle.
/// `applications` is indexed like `agents`.
void run_recruitment_cycle(std::span<AgentState> agents, std::span<const std::vector<OccupationId>> applications,
                           const WorldConfig& cfg, RecruitmentState& state);

struct WageComponents {
    double base = 0.0;
    double phi = 1.0;
    double index = 1.0;
    double delta = 0.0;
    Currency wage;  // per pay period
};

struct WageSchedule {
    std::vector<WageComponents> wages;  // per occupation
    [[nodiscard]] Currency wage(OccupationId o) const { return wages.at(o.index).wage; }
};

/// Static: w0 * index. Dynamic: w0 * phi * index * (1 + delta), one uniform
/// delta draw per dynamic occupation in catalog order.
WageSchedule compute_wages(const WorldConfig& cfg, std::span<const double> thresholds, double price_index, Rng& rng);

struct WorkOutcome {
    Duration worked;
    Currency pay;
    Level energy_spent;
    Level satiety_spent;
};

/// Works up to `duration`, stopping early when energy or satiety would go
/// negative. Pay is pro-rated against the standard hours of a pay period.
WorkOutcome pay_and_deplete(AgentState& agent, const OccupationSpec& occ, Duration duration, Currency wage,
                            const WorldConfig& cfg);

}  // namespace econsim
