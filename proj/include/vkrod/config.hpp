#ifndef VKROD_CONFIG_HH
#define VKROD_CONFIG_HH

#include <optional>
#include <string>

#include <json.hpp>

#include "vkrod/rod.hpp"
#include "vkrod/verify.hpp"

namespace vkrod {

using Json = nlohmann::json;

// Single JSON config file with per-module blocks; every block validates
// against its module's invariants before any solve starts.
struct RunConfig {
    std::uint64_t seed = 0;
    int threads = 4;

    std::optional<MicrostructureSpec> micro;

    struct Section {
        SectionShape shape = SectionShape::Disk;
        double radius = 1.0;
        double width = 1.0, height = 1.0;
        std::vector<Vector2> polygon;
        double mesh_h = 0.1;
    };
    std::optional<Section> section;

    std::optional<RegimeSpec> regime;

    LoadSpec load;
    int rod_nodes = 1001;
    BcVariant bc = BcVariant::ClampedLeft;

    MacroStrain macro;
    double macro_L = 1.0;
    std::vector<double> h_list;

    std::optional<EffectiveTable> effective_inline;
    std::string effective_file;

    std::vector<double> birkhoff_g;
    std::vector<double> birkhoff_windows;

    std::string out_csv;
    std::string out_json;
    std::string out_mesh_json;
};

RunConfig parse_config(const Json& j);
RunConfig load_config_file(const std::string& path);

ElasticityTensor material_from_json(const Json& j);
Json material_to_json(const ElasticityTensor& t);

MicrostructureSpec microstructure_from_json(const Json& j, std::uint64_t default_seed);

Json effective_to_json(const EffectiveForm& eff);
EffectiveForm effective_from_json(const Json& j);
EffectiveTable effective_table_from_json(const Json& j);

CrossSection build_section_from_config(const RunConfig::Section& s);

// All numeric CSV fields carry 17 significant digits.
std::string format_g17(double v);

} // namespace vkrod

#endif
