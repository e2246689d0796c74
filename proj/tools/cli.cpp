#include "cli.hpp"

#include "superpack/certifier.hpp"
#include "superpack/family.hpp"
#include "superpack/lattice.hpp"
#include "superpack/optimizer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace superpack::cli {

using json = nlohmann::ordered_json;

std::string fmt12(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

namespace {

double round12(double v)
{
    return std::stod(fmt12(v));
}

double parse_double(const std::string& tok)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != tok.size()) {
        throw CLI::ValidationError("--p", "cannot parse '" + tok + "'");
    }
    return v;
}

}  // namespace

std::vector<double> parse_p_grid(const std::string& text)
{
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        std::string part;
        while (std::getline(ss, part, ':')) {
            parts.push_back(part);
        }
        if (parts.size() != 3) {
            throw CLI::ValidationError("--p", "grid must be start:step:end");
        }
        const double start = parse_double(parts[0]);
        const double step = parse_double(parts[1]);
        const double end = parse_double(parts[2]);
        if (!(step > 0.0) || end < start) {
            throw CLI::ValidationError("--p", "grid needs step > 0 and end >= start");
        }
        const double n = (end - start) / step;
        const double nr = std::round(n);
        const auto count = static_cast<long>(std::fabs(n - nr) <= 1e-12 * std::max(1.0, nr) ? nr : std::floor(n));
        if (count > 1000000) {
            throw CLI::ValidationError("--p", "grid too large");
        }
        for (long k = 0; k <= count; ++k) {
            out.push_back(k == count && std::fabs(n - nr) <= 1e-12 * std::max(1.0, nr) ? end : start + k * step);
        }
        return out;
    }
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        out.push_back(parse_double(tok));
    }
    if (out.empty()) {
        throw CLI::ValidationError("--p", "empty grid");
    }
    return out;
}

namespace {

class Output {
public:
    Output(const std::string& path, std::ostream& fallback)
    {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) {
                throw std::invalid_argument("cannot open output file " + path);
            }
        }
        os_ = file_ ? file_.get() : &fallback;
    }
    std::ostream& stream() { return *os_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* os_;
};

json matrix_json(const Basis& b)
{
    json m = json::array();
    for (double v : b.row_major()) {
        m.push_back(round12(v));
    }
    return m;
}

double resolve_p(const BasisRecord& rec, const std::optional<double>& flag)
{
    if (flag) {
        return *flag;
    }
    if (rec.p) {
        return *rec.p;
    }
    throw CLI::ValidationError("--p", "no exponent given and the basis file has none");
}

json int_vec(const IntVec3& u)
{
    return json::array({u[0], u[1], u[2]});
}

json critical_point_json(const CriticalPoint& cp, double p)
{
    json j;
    j["case"] = to_string(cp.case_id);
    j["p"] = round12(p);
    j["matrix"] = matrix_json(cp.basis);
    j["density"] = round12(cp.density);
    j["residual"] = round12(cp.residual);
    j["neighbors"] = cp.neighbors;
    j["verified"] = cp.verified;
    return j;
}

struct Options {
    std::string file;
    std::optional<double> p;
    std::string p_grid;
    int case_id = 3;
    int restarts = 500;
    unsigned long long seed = kDefaultSeed;
    std::optional<double> tol;
    std::string schedule;
    bool automatic = false;
    double from = 1.0;
    double to = kCertifiedLimit;
    double step = 0.01;
    bool past_limit = false;
    int splits = 1;
    int jobs = 1;
    int regime = 1;
    bool as_json = false;
    std::string out;
};

int cmd_density(const Options& o, std::ostream& out)
{
    const BasisRecord rec = read_basis_file(o.file);
    const Exponent p(resolve_p(rec, o.p));
    const double tol = o.tol.value_or(kDefaultTol);
    const auto rep = verify_packing(rec.basis, p, tol);
    json j;
    j["density"] = round12(density(rec.basis, p));
    j["det"] = round12(std::fabs(rec.basis.det()));
    j["neighbors"] = count_neighbors(rec.basis, p, tol);
    j["verified"] = rep.is_packing;
    Output dst(o.out, out);
    dst.stream() << j.dump() << '\n';
    return kSuccess;
}

int cmd_verify(const Options& o, std::ostream& out)
{
    const BasisRecord rec = read_basis_file(o.file);
    const Exponent p(resolve_p(rec, o.p));
    const auto rep = verify_packing(rec.basis, p, o.tol.value_or(kDefaultTol));
    json j;
    j["p"] = round12(p);
    j["is_packing"] = rep.is_packing;
    j["min_norm"] = round12(rep.min_norm);
    j["argmin"] = int_vec(rep.argmin);
    j["enumeration_box"] = int_vec(rep.enumeration_box);
    j["vectors_checked"] = rep.vectors_checked;
    json v = json::array();
    for (const auto& u : rep.violators) {
        v.push_back(int_vec(u));
    }
    j["violators"] = v;
    Output dst(o.out, out);
    dst.stream() << j.dump() << '\n';
    return rep.is_packing ? kSuccess : kVerificationFailed;
}

SearchConfig search_config(const Options& o)
{
    SearchConfig cfg;
    cfg.restarts = o.restarts;
    cfg.seed = o.seed;
    cfg.jobs = o.jobs;
    return cfg;
}

int cmd_search(const Options& o, std::ostream& out)
{
    if (!o.p) {
        throw CLI::ValidationError("--p", "search needs --p");
    }
    const Exponent p(*o.p);
    const auto results = random_search(neighbor_case(case_from_int(o.case_id)), p, search_config(o));
    json arr = json::array();
    for (const auto& cp : results) {
        arr.push_back(critical_point_json(cp, p));
    }
    Output dst(o.out, out);
    dst.stream() << arr.dump(2) << '\n';
    return kSuccess;
}

void write_family(std::ostream& os, const std::vector<FamilyRow>& rows, bool as_json)
{
    if (as_json) {
        json arr = json::array();
        for (const auto& r : rows) {
            json j;
            j["p"] = round12(r.p);
            j["status"] = r.status;
            if (r.ok) {
                j["x"] = round12(r.point.x);
                j["y"] = round12(r.point.y);
                j["z"] = round12(r.point.z);
                j["det"] = round12(r.det);
                j["density"] = round12(r.density);
                j["neighbors"] = r.neighbors;
            }
            arr.push_back(j);
        }
        os << arr.dump(2) << '\n';
        return;
    }
    os << "p,x,y,z,det,density,neighbors\n";
    for (const auto& r : rows) {
        if (r.ok) {
            os << fmt12(r.p) << ',' << fmt12(r.point.x) << ',' << fmt12(r.point.y) << ',' << fmt12(r.point.z) << ','
               << fmt12(r.det) << ',' << fmt12(r.density) << ',' << r.neighbors << '\n';
        } else {
            os << fmt12(r.p) << ",,,,,,\n";
        }
    }
}

int cmd_family(const Options& o, std::ostream& out)
{
    const auto grid = parse_p_grid(o.p_grid.empty() ? (o.p ? fmt12(*o.p) : "1:0.1:1.5") : o.p_grid);
    const auto rows = family_table(grid);
    Output dst(o.out, out);
    write_family(dst.stream(), rows, o.as_json);
    for (const auto& r : rows) {
        if (!r.ok) {
            return kNumericalFailure;
        }
    }
    return kSuccess;
}

int cmd_certify(const Options& o, std::ostream& out, std::ostream& err)
{
    std::vector<RowParams> rows;
    bool incomplete = false;
    if (o.automatic) {
        const auto sched = auto_schedule(o.from, o.to, o.step, o.past_limit);
        if (!sched.complete) {
            err << "auto schedule stopped at p = " << fmt12(sched.reached) << '\n';
            incomplete = true;
        }
        rows = sched.rows;
    } else if (!o.schedule.empty()) {
        std::ifstream in(o.schedule);
        if (!in) {
            throw std::invalid_argument("cannot open schedule " + o.schedule);
        }
        rows = complete_schedule(parse_schedule_csv(in));
    } else {
        rows = reference_schedule();
    }
    // auto_schedule rows were found with its own split count.
    const VerifyOptions vo{o.automatic ? std::max(o.splits, kAutoScheduleSplits) : o.splits, {}};
    const auto chain = certify_schedule(rows, o.jobs, vo);
    Output dst(o.out, out);
    write_certificate_jsonl(dst.stream(), chain);
    if (!chain.ok()) {
        try {
            require_valid(chain);
        } catch (const CertificationError& e) {
            err << "certification failed: " << e.what() << '\n';
        }
        return kVerificationFailed;
    }
    return incomplete ? kVerificationFailed : kSuccess;
}

int cmd_table(const Options& o, std::ostream& out)
{
    Output dst(o.out, out);
    if (o.regime == 1) {
        const auto rows = family_table({1.0, 1.1, 1.2, 1.3, 1.4, 1.5, kLog2Of3});
        write_family(dst.stream(), rows, o.as_json);
        return kSuccess;
    }
    if (o.regime != 2) {
        throw CLI::ValidationError("--regime", "regime must be 1 or 2");
    }
    dst.stream() << "p,density,neighbors,residual\n";
    for (double p : {1.6, 1.7, 1.8, 1.9, 2.0}) {
        const auto res = random_search(neighbor_case(CaseId::I), Exponent(p), search_config(o));
        if (res.empty()) {
            dst.stream() << fmt12(p) << ",,,\n";
        } else {
            dst.stream() << fmt12(p) << ',' << fmt12(res.front().density) << ',' << res.front().neighbors << ','
                         << fmt12(res.front().residual) << '\n';
        }
    }
    return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Dense lattice packings of three-dimensional superballs"};
    app.require_subcommand(1);
    Options o;

    auto* density_cmd = app.add_subcommand("density", "Density, |det| and neighbor count of a basis");
    density_cmd->add_option("file", o.file, "Basis file (JSON or 9 numbers)")->required();
    density_cmd->add_option("--p", o.p, "Exponent (overrides the file)");
    density_cmd->add_option("--tol", o.tol, "Packing tolerance");
    density_cmd->add_option("--out", o.out, "Output file");

    auto* verify_cmd = app.add_subcommand("verify", "Check the packing condition by enumeration");
    verify_cmd->add_option("file", o.file, "Basis file (JSON or 9 numbers)")->required();
    verify_cmd->add_option("--p", o.p, "Exponent (overrides the file)");
    verify_cmd->add_option("--tol", o.tol, "Packing tolerance (default 1e-9)");
    verify_cmd->add_option("--out", o.out, "Output file");

    auto* search_cmd = app.add_subcommand("search", "Random-restart Newton search for critical lattices");
    search_cmd->add_option("--case", o.case_id, "Neighbor case 1, 2 or 3")->check(CLI::Range(1, 3));
    search_cmd->add_option("--p", o.p, "Exponent")->required();
    search_cmd->add_option("--restarts", o.restarts, "Number of random starts")->check(CLI::PositiveNumber);
    search_cmd->add_option("--seed", o.seed, "Seed");
    search_cmd->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
    search_cmd->add_option("--out", o.out, "Output file");

    auto* family_cmd = app.add_subcommand("family", "Tabulate the Case III family by continuation");
    family_cmd->add_option("--p", o.p_grid, "start:step:end, list, or value (default 1:0.1:1.5)");
    family_cmd->add_flag("--json", o.as_json, "JSON records instead of CSV");
    family_cmd->add_option("--out", o.out, "Output file");

    auto* certify_cmd = app.add_subcommand("certify", "Interval certificates for the family");
    auto* sched_opt = certify_cmd->add_option("--schedule", o.schedule, "CSV p0,x0,y0,z0,eps,peps");
    certify_cmd->add_flag("--auto", o.automatic, "Build the schedule automatically")->excludes(sched_opt);
    certify_cmd->add_option("--from", o.from, "Auto schedule start");
    certify_cmd->add_option("--to", o.to, "Auto schedule end");
    certify_cmd->add_option("--step", o.step, "Auto schedule initial step");
    certify_cmd->add_flag("--past-limit", o.past_limit, "Allow auto schedules past p = 1.58");
    certify_cmd->add_option("--splits", o.splits, "Box subdivisions per row")->check(CLI::Range(1, 64));
    certify_cmd->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
    certify_cmd->add_option("--out", o.out, "Output file (JSON lines)");

    auto* table_cmd = app.add_subcommand("table", "Reproduce the density tables");
    table_cmd->add_option("--regime", o.regime, "1 (family) or 2 (Case I search)");
    table_cmd->add_option("--restarts", o.restarts, "Restarts per p (regime 2)")->check(CLI::PositiveNumber);
    table_cmd->add_option("--seed", o.seed, "Seed");
    table_cmd->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
    table_cmd->add_flag("--json", o.as_json, "JSON records instead of CSV (regime 1)");
    table_cmd->add_option("--out", o.out, "Output file");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kSuccess;
        }
        err << e.what() << '\n';
        return kUsage;
    }

    try {
        if (*density_cmd) {
            return cmd_density(o, out);
        }
        if (*verify_cmd) {
            return cmd_verify(o, out);
        }
        if (*search_cmd) {
            return cmd_search(o, out);
        }
        if (*family_cmd) {
            return cmd_family(o, out);
        }
        if (*certify_cmd) {
            return cmd_certify(o, out, err);
        }
        if (*table_cmd) {
            return cmd_table(o, out);
        }
    } catch (const CLI::ValidationError& e) {
        err << e.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericalFailure;
    }
    return kUsage;
}

}  // namespace superpack::cli
