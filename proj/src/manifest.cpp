#include "mesogrow/manifest.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mesogrow {

std::string file_hash(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::uint64_t h = 1469598103934665603ull;
    char buf[1 << 14];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

void RunManifest::write(const std::string& out_dir) const
{
    nlohmann::json j;
    j["config"] = config_text;
    j["stop_reason"] = stop_reason;
    j["diverged"] = diverged;
    j["steps"] = steps;
    j["t_final"] = t_final;
    j["wall_seconds"] = wall_seconds;
    j["phase_seconds"] = phase_seconds;
    for (const auto& [k, v] : extra)
        j[k] = v;
    nlohmann::json files = nlohmann::json::object();
    for (const auto& f : outputs)
        files[f] = file_hash(out_dir + "/" + f);
    j["files"] = files;
    std::ofstream out(out_dir + "/run.json");
    if (!out)
        throw std::runtime_error("cannot write run.json in " + out_dir);
    out << j.dump(2) << "\n";
}

} // namespace mesogrow
