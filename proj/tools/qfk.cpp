#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <omp.h>

#include "CLI11.hpp"

#include "qfk/suite.hpp"

namespace
{

void apply_thread_hint()
{
    if (const char *env = std::getenv("QFK_THREADS")) {
        char *end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) {
            omp_set_num_threads(static_cast<int>(v));
        }
    }
}

std::set<std::string> split_ids(const std::string &list)
{
    std::set<std::string> out;
    std::stringstream ss(list);
    std::string id;
    while (std::getline(ss, id, ',')) {
        if (!id.empty()) {
            out.insert(id);
        }
    }
    return out;
}

void write_output(const std::string &text, const std::string &out)
{
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) {
        throw qfk::spec_error("", "cannot write " + out);
    }
    f << text;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"qfk: twistor-space construction and verification on truncated power series"};
    app.require_subcommand(1);

    std::string spec_path, out, suite, format = "json";
    std::optional<std::uint64_t> seed;
    bool timings = false;

    auto add_common = [&](CLI::App *sub) {
        sub->add_option("spec", spec_path, "geometry spec JSON file")->required();
        sub->add_option("--out", out, "write output to this file instead of stdout");
        sub->add_option("--seed", seed, "override the spec's RNG seed");
    };
    auto *validate = app.add_subcommand("validate", "parse and validate a spec, print the normalized form");
    auto *check = app.add_subcommand("check", "run the check suite and emit a report");
    auto *forms = app.add_subcommand("forms", "dump the Kähler form, connection and contact forms");
    auto *charts = app.add_subcommand("charts", "dump chart maps and the transition jet at the base point");
    for (auto *sub : {validate, check, forms, charts}) {
        add_common(sub);
    }
    check->add_option("--suite", suite, "comma-separated check ids to run");
    check->add_option("--format", format, "report format")->check(CLI::IsMember({"json", "text"}));
    check->add_flag("--timings", timings, "include wall times in the report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    apply_thread_hint();
    try {
        qfk::GeometrySpec spec = qfk::load_spec(spec_path);
        if (seed) {
            spec.seed = *seed;
        }
        if (*validate) {
            write_output(qfk::dump_json(qfk::spec_to_json(spec)), out);
            return 0;
        }
        if (*forms) {
            write_output(qfk::dump_json(qfk::dump_forms(spec)), out);
            return 0;
        }
        if (*charts) {
            write_output(qfk::dump_json(qfk::dump_charts(spec)), out);
            return 0;
        }
        qfk::SuiteOptions opts;
        opts.timings = timings;
        if (!suite.empty()) {
            opts.only = split_ids(suite);
            const auto ids = qfk::suite_ids(spec);
            for (const auto &id : *opts.only) {
                if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
                    throw qfk::spec_error("--suite", "unknown or disabled check id '" + id + "'");
                }
            }
        }
        const qfk::Report report = qfk::run_suite(spec, opts);
        write_output(qfk::emit(report, format, timings), out);
        return report.pass() ? 0 : 1;
    } catch (const qfk::spec_error &e) {
        std::cerr << "qfk: config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "qfk: error: " << e.what() << "\n";
        return 2;
    }
}
