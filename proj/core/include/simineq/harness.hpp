#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "simineq/inference.hpp"
#include "simineq/models/entry_game.hpp"
#include "simineq/models/intersection.hpp"

namespace simineq {

enum class ModelKind
{
    intersection,
    entry
};

enum class MethodKind
{
    naive,  //!< fixed critical value
    gms,    //!< bootstrap with moment selection
    smooth  //!< smoothed statistic with bias-corrected bootstrap
};

std::string_view to_string(MethodKind kind);
MethodKind method_kind_from_string(std::string_view name);

struct MethodSpec
{
    MethodKind method = MethodKind::naive;
    bool analytic = false;  //!< exact moments instead of simulation
    std::size_t B = 1000;
    KappaRule kappa = KappaRule::sqrt_log_n;
    double mu = 0.02;
    std::size_t R2 = 100;
    std::optional<double> critical_value;  //!< naive override
};

struct ModelSpec
{
    ModelKind kind = ModelKind::intersection;
    bool slack_design = false;
    std::optional<std::size_t> first_stage;
    EntryConfig entry;

    std::string label() const;
};

struct ExperimentConfig
{
    ModelSpec model;
    std::vector<std::size_t> n_values{100};
    std::vector<std::size_t> R_values{1};
    std::vector<std::size_t> J_values{2};
    std::size_t reps = 1000;
    double alpha = 0.05;
    std::vector<MethodSpec> methods;
    std::uint64_t master_seed = 20240607;
    std::size_t parallelism = 1;
};

//! One (n, R, J, method) combination; R = 0 marks analytic moments.
struct Cell
{
    std::size_t n = 0;
    std::size_t R = 0;
    std::size_t J = 0;
    MethodSpec method;
};

struct CellResult
{
    std::string model;
    Cell cell;
    std::size_t reps = 0;
    std::size_t covered = 0;
    double coverage = 0;
    std::optional<double> median_excess_length;
    std::optional<std::size_t> selection_disagreements;
    std::uint64_t seed = 0;
    double wall_seconds = 0;
};

struct ExperimentResult
{
    ExperimentConfig config;
    std::vector<CellResult> cells;
};

struct RunOptions
{
    bool record_timing = false;  //!< otherwise wall_seconds is written as 0
};

//! Validate the configuration; throws ConfigError naming the offending key.
void validate(ExperimentConfig const& cfg);

//! Cells in output order: n, then J, then method, then R.
std::vector<Cell> expand_cells(ExperimentConfig const& cfg);

/*!
 * Monte Carlo replications of one cell.
 *
 * Replication k draws its data from a stream keyed on (n, J, k) only, so all
 * methods and R values see the same samples; shocks are keyed on (n, J, R, k)
 * and bootstrap draws on the cell and k. A failing replication aborts the
 * cell with an error naming the cell and replication.
 */
CellResult run_coverage_cell(ExperimentConfig const& cfg,
                             Cell const& cell,
                             RunOptions const& options = {});

ExperimentResult run_experiment(ExperimentConfig const& cfg,
                                RunOptions const& options = {});

struct IntervalOutcome
{
    bool covered = false;  //!< the interval contains the identified-set edge
    double endpoint = 0;   //!< right end of the one-sided interval
};

//! One-sided interval for the intersection model on the given sample; R is
//! ignored for analytic methods.
IntervalOutcome intersection_interval(IntersectionConfig const& cfg,
                                      Dataset const& data,
                                      MethodSpec const& method,
                                      std::size_t R,
                                      double alpha,
                                      Stream const& panel_stream,
                                      Stream const& boot_stream);

//! True iff the GMS selections {j : xi_j >= -1} differ. Zero-variance
//! moments count as not selected.
bool selection_disagreement(MomentStats const& analytic,
                            MomentStats const& simulated,
                            double kappa);

//! Selected moments with zero-variance moments treated as not selected.
std::vector<std::size_t> gms_selection(MomentStats const& stats, double kappa);

enum class ExportFormat
{
    csv,
    structured
};

inline constexpr std::string_view csv_header
    = "model,n,R,J,method,mu,kappa,reps,coverage,median_excess_length,"
      "selection_disagreements,seed,wall_seconds";

std::string results_csv(ExperimentResult const& result);

//! Writes the CSV, or the JSON configuration sidecar for `structured`.
void export_results(ExperimentResult const& result,
                    std::string const& path,
                    ExportFormat format);

//---------------------------------------------------------------------------//
enum class TableId
{
    T1,
    T3,
    T4,
    T5,
    T6,
    T7,
    T8,
    T9
};

enum class Scale
{
    full,
    desk
};

TableId table_id_from_string(std::string_view name);
std::string_view to_string(TableId id);
Scale scale_from_string(std::string_view name);

ExperimentConfig table_preset(TableId id, Scale scale);

ExperimentResult reproduce_table(TableId id,
                                 Scale scale,
                                 RunOptions const& options = {});

//---------------------------------------------------------------------------//
ExperimentConfig parse_config(std::string const& text);
ExperimentConfig load_config(std::string const& path);
std::string config_to_string(ExperimentConfig const& cfg);

}  // namespace simineq
