#pragma once

#include <map>
#include <optional>

#include "semilab/predictions.hpp"
#include "semilab/smoothing.hpp"

namespace semilab {

// Flat "section.key = value" text; '#' starts a comment; arrays are comma
// lists. Later assignments override earlier ones.
using ConfigMap = std::map<std::string, std::string>;
ConfigMap parse_config_text(const std::string& text);
ConfigMap parse_config_file(const std::string& path);
void apply_override(ConfigMap& cfg, const std::string& key_eq_value);
std::string canonical_config(const ConfigMap& cfg);
std::string config_hash(const ConfigMap& cfg);  // FNV-1a 64, hex

enum class ObservableKind { PositionDensity, TwoMicro, Smoothing };
enum class OracleKind { None, Isolated, Degenerate, Manifold, RankOneConsistency };
enum class RuntimeMode { Wall, None };

struct GuardSpec {
    double boundary_threshold = 1e-6;
    double band_k = 8.0;   // half-width of the monitored eta band
    int monitor_stride = 8;
    // mass-conservation bounds; the free bound needs loosening on grids
    // beyond ~2^18 points where FFT roundoff alone exceeds 1e-13
    double mass_drift_free = 1e-13;
    double mass_drift_strang = 1e-10;
};

// Fully parsed experiment description.
struct ExperimentConfig {
    ConfigMap raw;

    SymbolSpec symbol;
    PotentialSpec potential;  // cosine potentials are built against grid.L
    DataFamily family;
    std::vector<double> epsilons;  // decreasing
    std::vector<double> box_half_len;
    std::optional<std::vector<int>> grid_n;  // auto-sized when absent

    TimeWindow window;
    ObservableKind observable = ObservableKind::PositionDensity;
    TestFunction phi;              // position density / two-micro x factor
    CutoffParams cutoff;           // two-micro
    std::optional<CutoffKind> cutoff_kind;
    double smoothing_s = 0.5;      // smoothing observable
    Ball smoothing_ball;
    double smoothing_delta = 0.5;

    OracleKind oracle = OracleKind::None;
    GuardSpec guard;
    RuntimeMode runtime_mode = RuntimeMode::Wall;

    double run_epsilon = 0.0;       // single-state subcommands; 0 = first of schedule
    double wigner_time = 0.0;
    std::string out_table, out_state;

    static ExperimentConfig from_map(const ConfigMap& cfg);
};

// Every violated hypothesis, empty when the experiment is well posed.
std::vector<std::string> validate(const ExperimentConfig& cfg);

struct ResultRow {
    double eps = 0;
    double measured = 0;
    std::optional<double> predicted, gap;
    double runtime_s = 0;
    bool valid = true;
    std::string guard_note;
};

struct ResultTable {
    std::vector<ResultRow> rows;  // ordered by decreasing eps
    std::string config_hash;
    std::string code_version;
    bool has_oracle = false;
    bool any_invalid() const;
};

extern const char* kCodeVersion;

// Deterministic observable sweep over the eps schedule. Throws
// ValidationError when validate() is nonempty. Rows whose numerical guards
// trip are marked invalid, never silently reported.
ResultTable run_convergence(const ExperimentConfig& cfg, int threads = 1);

// Single-eps helpers shared by the CLI subcommands.
Grid grid_for(const ExperimentConfig& cfg, double eps);
PredictedLimit predict_for(const ExperimentConfig& cfg, const Grid& g);

std::string table_to_csv(const ResultTable& table, RuntimeMode mode);
void write_table_csv(const ResultTable& table, const std::string& path, RuntimeMode mode);
// Sidecar metadata (config hash, code version), written next to the table.
void write_table_meta(const ResultTable& table, const std::string& path);

int thread_count_from_env(int flag_value);  // flag wins over SEMILAB_THREADS

}  // namespace semilab
