#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "epifamily/asm.hpp"
#include "epifamily/hm.hpp"
#include "epifamily/iwm.hpp"
#include "epifamily/series.hpp"

namespace epifamily::pipelines {

/// A series together with the model that produced it.
struct TaggedSeries {
    std::string name;
    std::string model;
    DailySeries series;
};

struct PipelineReport {
    std::string pipeline;
    std::string scenario_id;
    std::vector<TaggedSeries> inputs;
    std::vector<TaggedSeries> outputs;
    /// Seeds, config hashes and pipeline-specific results.
    nlohmann::json metadata = nlohmann::json::object();

    void add_input(std::string name, std::string model, DailySeries series);
    void add_output(std::string name, std::string model, DailySeries series);
    /// Provenance without the series values.
    nlohmann::json to_json() const;
};

/// Producer ids used in provenance records.
namespace producer {
inline constexpr const char* input = "input";
inline constexpr const char* scenario = "scenario-gen";
inline constexpr const char* hm = "hm";
inline constexpr const char* iwm = "iwm";
inline constexpr const char* asm_model = "asm";
inline constexpr const char* ss4 = "pipeline-ss4";
} // namespace producer

/// Rate factors of `params` (1 when absent) over [from, to), multiplied by
/// `factor` from `switch_day` onward.
DailySeries scaled_xi(const hm::HmParams& params, Date from, Date to, double factor, Date switch_day);

struct OccupancyCell {
    std::size_t scenario = 0;
    double factor = 1.0;
    hm::HmOutput output;
};

struct Ss1Result {
    std::vector<OccupancyCell> cells;
    PipelineReport report;
};

/// Occupancy for every (scenario, virulence factor) pair. Each scenario is
/// appended to `history` when given; xi is scaled from the first forecast day.
Ss1Result pipeline_ss1(const std::optional<DailySeries>& history, const std::vector<DailySeries>& scenarios,
                       const std::vector<double>& factors, const hm::HmParams& params, std::size_t jobs = 1);

struct SplitTrajectory {
    asm_model::Split split = asm_model::Split::all;
    /// Mean age of the infectious density on every trajectory day.
    std::optional<DailySeries> mean_age;
    /// Why the split is undefined when `mean_age` is empty.
    std::string error;
};

struct Ss2Result {
    asm_model::BetaCalibration calibration;
    /// all, vaccinated, unvaccinated.
    std::array<SplitTrajectory, 3> splits;
    /// Day of maximal model incidence (offset from the forecast start).
    std::size_t peak_day = 0;
    /// Mean age of all infectious persons on the peak day.
    double peak_mean_age = 0.0;
    PipelineReport report;
};

/// Calibrates the weekly beta steps to the forecast and reports the age
/// structure of the infectious population over time.
Ss2Result pipeline_ss2(const DailySeries& forecast, const asm_model::AsmState& state0,
                       const asm_model::AsmParams& params, const asm_model::AgeMesh& mesh, std::size_t weeks = 7,
                       const asm_model::BetaCalibrationOptions& options = {});

struct Band {
    DailySeries mean;
    DailySeries min;
    DailySeries max;
};

struct Ss3Result {
    std::vector<std::uint64_t> seeds;
    /// Protection curves per seed.
    std::vector<iwm::ProtectionCurves> runs;
    Band infection;
    Band severe;
    PipelineReport report;
};

/// Mean and min-max band over seeds of the protection curves.
Band band_of(const std::vector<DailySeries>& runs);

/// Runs the IWM on history followed by forecast per variant (forecast may be
/// absent per variant) for every seed. `config.variants[s].cases` are replaced.
Ss3Result pipeline_ss3(const std::vector<DailySeries>& history,
                       const std::vector<std::optional<DailySeries>>& forecast, iwm::IwmConfig config,
                       const std::string& infection_target, const std::string& severe_target,
                       const std::vector<std::uint64_t>& seeds, std::size_t jobs = 1);

/// (1 - P(PS)) / (1 - P(PI)). Throws NumericalError when P(PI) = 1.
double ss4_ratio(double ps, double pi);

struct Ss4Result {
    DailySeries ratio;
    /// ratio normalized to 1 on the anchor day.
    DailySeries xi;
    Date anchor{};
    hm::HmOutput adjusted;
    hm::HmOutput unadjusted;
    PipelineReport report;
};

/// Scales the hospitalisation rate by the anchor-normalized SS4 ratio. The
/// curves must cover every case day; PS < PI raises ContractError naming the day.
Ss4Result pipeline_ss4(const iwm::ProtectionCurves& curves, const DailySeries& cases, const hm::HmParams& params,
                       Date anchor);

} // namespace epifamily::pipelines
