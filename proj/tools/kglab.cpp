// kglab: batch front end for level schedules, density-pruned finite trees,
// partition systems, the partition-system codec, and failure-bound reports.
//
// Exit codes: 0 success, 1 invalid input, 2 coding failure (reported in JSON).

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kglab/codec.hpp"
#include "kglab/mltest.hpp"
#include "kglab/partition.hpp"
#include "kglab/rat.hpp"
#include "kglab/schedule.hpp"
#include "kglab/tree.hpp"

using json = nlohmann::json;
using namespace kglab;

namespace {

constexpr const char* kVersion = "kglab 0.1.0";

struct Options {
    std::string command;
    std::string schedule_kind = "exponential";
    std::uint64_t n_max = 4;
    std::uint64_t scale = 6;
    std::string levels;      // "0,1,2"
    std::string densities;   // "1/2,1/3,1/2"
    std::string tree_file;
    std::string tree_out;
    std::string budget = "0";
    std::string ps_file;
    std::string ps_out;
    std::string name_bits;
    std::uint64_t height = 0;
    bool have_height = false;
    std::uint64_t ps_seed = 0;
    bool have_ps_seed = false;
    std::string z;
    std::string y;
    std::string sigma0;
    std::string tau0;
    std::uint64_t level = 0;
    std::uint64_t trials = 1000;
    std::uint64_t seed = 0;
    std::string out;
    std::string csv;
};

std::vector<std::uint64_t> parse_u64_list(const std::string& s) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoull(item));
    return out;
}

std::vector<mpq_class> parse_rat_list(const std::string& s) {
    std::vector<mpq_class> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_rat(item));
    return out;
}

LevelSchedule build_schedule(const Options& o) {
    ScheduleSpec spec;
    spec.n_max = o.n_max;
    spec.scale = o.scale;
    if (o.schedule_kind == "exponential") spec.kind = ScheduleKind::Exponential;
    else if (o.schedule_kind == "nlogn") spec.kind = ScheduleKind::NLogN;
    else if (o.schedule_kind == "scaled-nlogn") spec.kind = ScheduleKind::ScaledNLogN;
    else if (o.schedule_kind == "custom") {
        spec.kind = ScheduleKind::Custom;
        spec.custom_levels = parse_u64_list(o.levels);
    } else {
        throw std::invalid_argument("unknown schedule kind: " + o.schedule_kind);
    }
    if (!o.densities.empty()) {
        spec.density = DensityKind::Custom;
        spec.custom_densities = parse_rat_list(o.densities);
    }
    return make_schedule(spec);
}

PartitionSystem build_system_from(const Options& o, const LevelSchedule& s) {
    if (!o.ps_file.empty()) return read_system_file(o.ps_file, s);
    if (!o.name_bits.empty()) return name_to_system(o.name_bits, s);
    if (o.have_ps_seed) {
        const std::uint64_t h = o.have_height ? o.height : s.horizon();
        return sample_uniform(s, h, o.ps_seed);
    }
    throw std::invalid_argument("need a system source: --ps-file, --name, or --ps-seed");
}

json config_echo(const Options& o) {
    json c;
    c["command"] = o.command;
    c["schedule"] = o.schedule_kind;
    c["nmax"] = o.n_max;
    c["scale"] = o.scale;
    if (!o.levels.empty()) c["levels"] = o.levels;
    if (!o.densities.empty()) c["densities"] = o.densities;
    if (!o.tree_file.empty()) c["tree"] = o.tree_file;
    if (!o.tree_out.empty()) c["tree_out"] = o.tree_out;
    if (o.budget != "0") c["budget"] = o.budget;
    if (!o.ps_file.empty()) c["ps_file"] = o.ps_file;
    if (!o.ps_out.empty()) c["ps_out"] = o.ps_out;
    if (!o.name_bits.empty()) c["name"] = o.name_bits;
    if (o.have_height) c["height"] = o.height;
    if (o.have_ps_seed) c["ps_seed"] = o.ps_seed;
    if (!o.z.empty()) c["z"] = o.z;
    if (!o.y.empty()) c["y"] = o.y;
    if (!o.sigma0.empty()) c["sigma0"] = o.sigma0;
    if (!o.tau0.empty()) c["tau0"] = o.tau0;
    c["level"] = o.level;
    c["trials"] = o.trials;
    c["seed"] = o.seed;
    return c;
}

void emit(const Options& o, json report) {
    report["version"] = kVersion;
    report["config"] = config_echo(o);
    const std::string text = report.dump(2) + "\n";
    if (o.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(o.out);
        if (!f) throw std::runtime_error("cannot write " + o.out);
        f << text;
    }
}

json schedule_rows(const LevelSchedule& s) {
    json rows = json::array();
    for (const auto& r : convergence_report(s)) {
        rows.push_back({{"n", r.n},
                        {"ell_n", r.ell},
                        {"m_n", r.m},
                        {"q_n", rat_str(s.density(r.n))},
                        {"sum_gap_inv", rat_str(r.sum_gap_inv)},
                        {"sum_density", rat_str(r.sum_density)},
                        {"level_bound", r.strict_ok},
                        {"level_bound_relaxed", r.relaxed_ok},
                        {"gap_bound", r.gap_ok}});
    }
    return rows;
}

int run(const Options& o) {
    const LevelSchedule s = build_schedule(o);
    json report;
    report["schedule"] = json::parse(schedule_to_json(s));

    if (o.command == "schedule-report") {
        report["rows"] = schedule_rows(s);
        emit(o, report);
        return 0;
    }
    if (o.command == "tree-gen") {
        FiniteTree t = generate_complement_tree(s, parse_rat(o.budget), o.seed);
        if (o.tree_out.empty()) throw std::invalid_argument("tree-gen needs --tree-out");
        write_tree_file(o.tree_out, t);
        report["leaves"] = t.leaf_count();
        report["measure"] = rat_str(t.measure());
        emit(o, report);
        return 0;
    }

    auto load_tree = [&]() {
        if (o.tree_file.empty()) throw std::invalid_argument("missing --tree");
        return read_tree_file(o.tree_file);
    };

    if (o.command == "tree-prune") {
        FiniteTree t = load_tree();
        FiniteTree pruned = prune_to_density(t, s);
        if (o.tree_out.empty()) throw std::invalid_argument("tree-prune needs --tree-out");
        write_tree_file(o.tree_out, pruned);
        report["measure_before"] = rat_str(t.measure());
        report["measure_after"] = rat_str(pruned.measure());
        auto two = check_two_extension(pruned, s);
        report["two_extension"] = two.ok;
        if (!two.ok) report["two_extension_witness"] = two.witness->str();
        emit(o, report);
        return 0;
    }
    if (o.command == "ps-sample" || o.command == "ps-name") {
        PartitionSystem ps = o.command == "ps-name"
                                 ? name_to_system(o.name_bits, s)
                                 : sample_uniform(s, o.have_height ? o.height : s.horizon(),
                                                  o.ps_seed);
        if (o.ps_out.empty()) throw std::invalid_argument("needs --ps-out");
        write_system_file(o.ps_out, ps);
        report["height"] = ps.height;
        report["valid"] = validate(ps).ok;
        emit(o, report);
        return 0;
    }
    if (o.command == "encode" || o.command == "roundtrip") {
        FiniteTree t = load_tree();
        PartitionSystem ps = build_system_from(o, s);
        const Bits sigma0 = Bits::parse(o.sigma0);
        const Bits tau0 = Bits::parse(o.tau0);
        EncodeResult r = encode(o.z, ps, t, sigma0, tau0);
        report["trace"] = json::parse(trace_to_json(r.trace));
        if (!r.ok()) {
            report["coding_failure"] = {{"step", r.failure->step},
                                        {"class_bit", r.failure->class_bit},
                                        {"sigma", r.failure->sigma.str()},
                                        {"tau", r.failure->tau.str()}};
            emit(o, report);
            return 2;
        }
        report["y"] = r.y.str();
        if (o.command == "roundtrip") {
            const std::string back = decode(ps, r.y, sigma0, tau0);
            report["recovered"] = back;
            report["match"] = back == o.z;
        }
        emit(o, report);
        return 0;
    }
    if (o.command == "decode") {
        PartitionSystem ps = build_system_from(o, s);
        report["z"] = decode(ps, Bits::parse(o.y), Bits::parse(o.sigma0), Bits::parse(o.tau0));
        emit(o, report);
        return 0;
    }
    if (o.command == "bounds-table") {
        std::optional<FiniteTree> t;
        if (!o.tree_file.empty()) t = read_tree_file(o.tree_file);
        json rows = schedule_rows(s);
        if (t) {
            for (auto& row : rows) {
                const std::uint64_t n = row["n"].get<std::uint64_t>();
                LevelBound lb = level_failure_bound(*t, s, n);
                row["sum_exact"] = rat_str(lb.sum_exact);
                row["paper_bound"] = rat_str(lb.paper_bound);
                row["satisfied"] = lb.sum_le_paper;
                row["threshold_ok"] = lb.threshold_ok;
                row["out_of_regime"] = lb.out_of_regime.size();
            }
        }
        report["rows"] = rows;
        if (!o.csv.empty()) {
            std::ofstream f(o.csv);
            if (!f) throw std::runtime_error("cannot write " + o.csv);
            f << "n,ell_n,m_n,q_n,sum_exact,paper_bound,satisfied,mc_estimate,mc_stderr,"
                 "trials,seed\n";
            for (const auto& row : rows) {
                f << row["n"] << "," << row["ell_n"] << "," << row["m_n"] << ","
                  << row["q_n"].get<std::string>() << ","
                  << (row.contains("sum_exact") ? row["sum_exact"].get<std::string>() : "")
                  << ","
                  << (row.contains("paper_bound") ? row["paper_bound"].get<std::string>() : "")
                  << ","
                  << (row.contains("satisfied") ? (row["satisfied"].get<bool>() ? "1" : "0")
                                                : "")
                  << ",,," << o.trials << "," << o.seed << "\n";
            }
        }
        emit(o, report);
        return 0;
    }
    if (o.command == "mc") {
        FiniteTree t = load_tree();
        McFailureResult r = mc_failure_estimate(t, s, o.level, o.trials, o.seed);
        report["mc"] = {{"trials", r.trials},
                        {"seed", r.seed},
                        {"hits", r.hits_any},
                        {"estimate", r.estimate_any},
                        {"stderr", r.stderr_any},
                        {"hits_class0", r.hits_class[0]},
                        {"estimate_class0", r.estimate_class[0]},
                        {"stderr_class0", r.stderr_class[0]},
                        {"hits_class1", r.hits_class[1]},
                        {"estimate_class1", r.estimate_class[1]},
                        {"stderr_class1", r.stderr_class[1]}};
        emit(o, report);
        return 0;
    }
    if (o.command == "find-n0") {
        FiniteTree t = load_tree();
        PartitionSystem ps = build_system_from(o, s);
        auto start = find_start(ps, t);
        if (start) {
            report["n0"] = start->n0;
            report["sigma0"] = start->sigma0.str();
            report["tau0"] = start->tau0.str();
        } else {
            report["n0"] = nullptr;
        }
        emit(o, report);
        return 0;
    }
    throw std::invalid_argument("unknown command: " + o.command);
}

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--schedule", o.schedule_kind,
                    "exponential|nlogn|scaled-nlogn|custom");
    cmd->add_option("--nmax", o.n_max, "schedule horizon N");
    cmd->add_option("--scale", o.scale, "coefficient for scaled-nlogn");
    cmd->add_option("--levels", o.levels, "custom levels, comma separated");
    cmd->add_option("--densities", o.densities, "densities as p/q, comma separated");
    cmd->add_option("--seed", o.seed, "64-bit unsigned decimal seed");
    cmd->add_option("--out", o.out, "report file (stdout when absent)");
}

}  // namespace

int main(int argc, char** argv) {
    Options o;
    CLI::App app{"finite Kucera-Gacs coding laboratory"};
    app.require_subcommand(1);

    // --config <file>: JSON object {"command": ..., "<flag>": value, ...}
    // expanded into argv for exact replay of a report's embedded config.
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.size() == 2 && args[0] == "--config") {
        std::ifstream f(args[1]);
        if (!f) {
            std::cerr << "cannot read config " << args[1] << "\n";
            return 1;
        }
        json c = json::parse(f, nullptr, false);
        if (c.is_discarded() || !c.contains("command")) {
            std::cerr << "bad config file\n";
            return 1;
        }
        args.clear();
        args.push_back(c["command"].get<std::string>());
        for (auto& [key, val] : c.items()) {
            if (key == "command") continue;
            args.push_back("--" + key);
            args.push_back(val.is_string() ? val.get<std::string>() : val.dump());
        }
    }

    const std::vector<std::string> commands = {
        "schedule-report", "tree-gen", "tree-prune", "ps-sample", "ps-name",
        "encode",          "decode",   "roundtrip",  "bounds-table", "mc", "find-n0"};
    for (const auto& name : commands) {
        CLI::App* cmd = app.add_subcommand(name);
        add_common(cmd, o);
        cmd->add_option("--tree", o.tree_file, "tree file");
        cmd->add_option("--tree-out", o.tree_out, "output tree file");
        cmd->add_option("--budget", o.budget, "removal budget as p/q");
        cmd->add_option("--ps-file", o.ps_file, "partition system file");
        cmd->add_option("--ps-out", o.ps_out, "output partition system file");
        cmd->add_option("--name", o.name_bits, "system name bits");
        cmd->add_option("--height", o.height)->each([&](const std::string&) {
            o.have_height = true;
        });
        cmd->add_option("--ps-seed", o.ps_seed)->each([&](const std::string&) {
            o.have_ps_seed = true;
        });
        cmd->add_option("--z", o.z, "payload bits");
        cmd->add_option("--y", o.y, "encoded prefix");
        cmd->add_option("--sigma0", o.sigma0, "start class (bit string)");
        cmd->add_option("--tau0", o.tau0, "start node (bit string)");
        cmd->add_option("--level", o.level, "level n");
        cmd->add_option("--trials", o.trials, "Monte Carlo trials");
        cmd->add_option("--csv", o.csv, "CSV output for bounds-table");
        cmd->callback([&o, name] { o.command = name; });
    }

    try {
        std::vector<const char*> cargs;
        cargs.push_back("kglab");
        for (const auto& a : args) cargs.push_back(a.c_str());
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        return run(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
