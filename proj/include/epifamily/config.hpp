#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "epifamily/asm.hpp"
#include "epifamily/delay.hpp"
#include "epifamily/hm.hpp"
#include "epifamily/iwm.hpp"
#include "epifamily/scenario.hpp"
#include "epifamily/series.hpp"

namespace epifamily::config {

/// A parsed JSON config. Relative paths inside it resolve against its directory,
/// and every file resolved through it is recorded in `inputs`.
class Source {
  public:
    Source(nlohmann::json json, std::filesystem::path base_dir, std::string origin);
    static Source load(const std::filesystem::path& path);

    const nlohmann::json& json() const noexcept { return json_; }
    const std::string& origin() const noexcept { return origin_; }
    const std::filesystem::path& base_dir() const noexcept { return base_dir_; }
    std::filesystem::path path(std::string_view relative);
    /// Files read so far, the config file itself first when loaded from disk.
    const std::vector<std::filesystem::path>& inputs() const noexcept { return inputs_; }
    void add_inputs(const Source& other);

  private:
    nlohmann::json json_;
    std::filesystem::path base_dir_;
    std::string origin_;
    std::vector<std::filesystem::path> inputs_;
};

/// Per-variant daily cases from `date,variant,count` (or `date,count`, read as
/// one variant named "all"). Variants keep their order of first appearance and
/// share one date range; missing rows inside it count as zero.
struct VariantCases {
    std::vector<std::string> variants;
    std::vector<DailySeries> series;

    DailySeries total() const;
    const DailySeries& of(std::string_view variant) const;
};
VariantCases parse_cases_csv(std::string_view text, std::string_view origin);
VariantCases read_cases_csv(const std::filesystem::path& path);
std::string cases_to_csv(const VariantCases& cases);

/// `date,dose,count` with dose in 1..3; each dose series spans the file's dates.
std::array<std::optional<DailySeries>, 3> read_vaccinations_csv(const std::filesystem::path& path);
/// `age_lo,age_hi,S,Sv,I,Iv,R`.
std::vector<asm_model::AgeBin> read_initial_csv(const std::filesystem::path& path);

/// Square contact matrix with `lo-hi` bin labels in the header and first column.
struct ContactMatrix {
    std::vector<std::pair<double, double>> bins;
    /// Row-major.
    std::vector<double> values;
};
ContactMatrix read_contact_csv(const std::filesystem::path& path);

/// {"family": "gamma"|"geometric"|"delta", "scale": s, "support": n, "shape"?},
/// {"lag": k}, or {"mass": [...]}.
DelayDistribution delay_from_json(const nlohmann::json& j);
KernelShape kernel_shape_from_json(const nlohmann::json& j);

struct IwmSetup {
    iwm::IwmConfig config;
    std::string infection_target;
    std::string severe_target;
};
IwmSetup load_iwm(Source& source);

struct HmSetup {
    hm::HmParams params;
    DailySeries cases;
    std::optional<DailySeries> reference;
    std::size_t tau = 0;
    hm::CalibrationOptions calibration{};
    /// Shift the occupancy onto the last reference value.
    bool anchor_shift = false;
};
HmSetup load_hm(Source& source);

struct AsmSetup {
    asm_model::AgeMesh mesh;
    asm_model::AsmParams params;
    asm_model::AsmState state0;
    Date start{};
    std::size_t horizon = 0;
    std::optional<DailySeries> reference;
    std::size_t weeks = 7;
    asm_model::BetaCalibrationOptions calibration{};
    /// Write age densities every this many days.
    std::size_t output_every = 1;
};
AsmSetup load_asm(Source& source);

struct ScenarioSetup {
    scenario::ScenarioSpec spec;
    std::size_t count = 1;
};
ScenarioSetup load_scenarios(Source& source);

} // namespace epifamily::config
