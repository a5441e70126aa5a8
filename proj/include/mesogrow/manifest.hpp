#pragma once

#include <map>
#include <string>
#include <vector>

namespace mesogrow {

/// FNV-1a content hash of a file, as a hex string.
std::string file_hash(const std::string& path);

struct RunManifest {
    std::string config_text;
    std::string stop_reason;
    bool diverged = false;
    long steps = 0;
    double t_final = 0.0;
    double wall_seconds = 0.0;
    std::map<std::string, double> phase_seconds;
    std::map<std::string, double> extra;
    std::vector<std::string> outputs; // paths relative to the run dir

    void write(const std::string& out_dir) const; // writes run.json
};

} // namespace mesogrow
