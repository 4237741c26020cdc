#ifndef QFK_SUITE_HPP
#define QFK_SUITE_HPP

// Geometry spec files, the full check suite and report output.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "qfk/assembly.hpp"

namespace qfk
{

using json = nlohmann::json;

// Parse or validation failure; `path` names the offending field.
class spec_error : public std::runtime_error
{
public:
    spec_error(std::string path, const std::string &msg)
        : std::runtime_error(path.empty() ? msg : path + ": " + msg), path_(std::move(path))
    {
    }
    const std::string &path() const { return path_; }

private:
    std::string path_;
};

struct Tolerances {
    double series = 1e-10;
    double sampled = 1e-8;
    double identity = 1e-12;
    std::map<std::string, double> checks; // per-check overrides
};

struct GeometrySpec {
    PotentialSpec potential;
    int overlap_samples = 50;
    int real_slice_samples = 50;
    int legendrian_leaves = 20;
    int cross_check_samples = 100;
    SampleBox box;
    double cross_check_radius = 0.1;
    Tolerances tolerances;
    std::uint64_t seed = 1;
    std::string cross_check; // empty, "example1" or "example2"
};

GeometrySpec parse_spec(const json &j);
GeometrySpec load_spec(const std::string &path);
// Normalized spec with every default filled in.
json spec_to_json(const GeometrySpec &spec);

enum class Status { pass, fail, degenerate };

struct CheckRecord {
    std::string id;
    std::string anchor; // the identity being checked
    Status status = Status::fail;
    double residual = 0.0;
    double tolerance = 0.0;
    bool lower_bound = false; // pass means residual > tolerance
    int samples = 0;
    double wall_time = 0.0;
    std::string message;
};

struct Report {
    std::vector<CheckRecord> checks;
    json config;
    bool pass() const;
};

struct SuiteOptions {
    std::optional<std::set<std::string>> only; // run just these ids
    bool timings = false;
};

// Check ids run for this spec, in report order.
std::vector<std::string> suite_ids(const GeometrySpec &spec);
Report run_suite(const GeometrySpec &spec, const SuiteOptions &opts = {});

// JSON with sorted keys and %.12e floats, or a text table.
std::string emit(const Report &report, const std::string &format, bool timings = false);
std::string dump_json(const json &j);

json dump_forms(const GeometrySpec &spec);
json dump_charts(const GeometrySpec &spec);

} // namespace qfk

#endif
