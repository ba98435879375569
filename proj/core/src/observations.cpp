#include "apf/observations.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "apf/errors.hpp"

namespace apf {

std::vector<double> read_observation_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open observation file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty observation file: " + path);
    // Tolerate a UTF-8 BOM and trailing CR.
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "k,y") throw ConfigError("observation file must start with header 'k,y': " + path);
    std::vector<double> record;
    std::size_t expected_k = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string k_field, y_field;
        if (!std::getline(row, k_field, ',') || !std::getline(row, y_field)) {
            throw ConfigError("malformed observation row: " + line);
        }
        std::size_t pos = 0;
        unsigned long k = std::stoul(k_field, &pos);
        if (pos != k_field.size() || k != expected_k) {
            throw ConfigError("observation rows must be numbered 0,1,2,...: " + line);
        }
        double y = std::stod(y_field, &pos);
        if (pos != y_field.size()) throw ConfigError("bad observation value: " + line);
        record.push_back(y);
        ++expected_k;
    }
    if (record.empty()) throw ConfigError("observation file has no rows: " + path);
    return record;
}

void write_observation_csv(const std::string& path, std::span<const double> record) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write observation file: " + path);
    out << "k,y\n";
    char buf[64];
    for (std::size_t k = 0; k < record.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g", record[k]);
        out << k << ',' << buf << '\n';
    }
}

}  // namespace apf
