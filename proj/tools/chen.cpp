#include <chen/bar.hpp>
#include <chen/itint.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "1.0.0";

/// Exit codes: 0 success, 1 the computation ran and the answer is a failure, 2 bad input.
enum ExitCode { kOk = 0, kDomainFailure = 1, kInputError = 2 };

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string sha256_hex(std::string_view data)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        hex += buf;
    }
    return hex;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot read '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const fs::path& path, const std::string& data)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InputError("cannot write '" + path.string() + "'");
    out << data;
}

std::string fmt(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15e", x);
    return buf;
}

/// Numerical settings shared by every subcommand. A config file overrides flags.
struct Settings {
    int mesh = 16;
    int order = 4;
    std::optional<int> time_cells;
    int mc_samples = 20000;
    unsigned seed = 12345;
    int estimator_cells = 16;
    int estimator_per_piece = 64;
    int max_length = 6;
    int samples = 200;
    double slack = 1e-9;

    chen::QuadratureOptions quadrature(int default_time_cells) const
    {
        return {mesh, order, time_cells.value_or(default_time_cells), mc_samples, seed};
    }
    chen::EstimatorOptions estimator() const { return {estimator_cells, estimator_per_piece}; }

    void apply(const nlohmann::json& j)
    {
        if (!j.is_object())
            throw InputError("config must be a JSON object");
        for (const auto& [key, v] : j.items()) {
            if (key == "mesh")
                mesh = v.get<int>();
            else if (key == "order")
                order = v.get<int>();
            else if (key == "time_cells")
                time_cells = v.get<int>();
            else if (key == "mc_samples")
                mc_samples = v.get<int>();
            else if (key == "seed")
                seed = v.get<unsigned>();
            else if (key == "estimator_cells")
                estimator_cells = v.get<int>();
            else if (key == "estimator_per_piece")
                estimator_per_piece = v.get<int>();
            else if (key == "max_length")
                max_length = v.get<int>();
            else if (key == "samples")
                samples = v.get<int>();
            else if (key == "slack")
                slack = v.get<double>();
            else
                throw InputError("unknown config key '" + key + "'");
        }
    }

    ojson to_json(int default_time_cells) const
    {
        return {{"mesh", mesh},
                {"order", order},
                {"time_cells", time_cells.value_or(default_time_cells)},
                {"mc_samples", mc_samples},
                {"seed", seed},
                {"estimator_cells", estimator_cells},
                {"estimator_per_piece", estimator_per_piece},
                {"max_length", max_length},
                {"samples", samples},
                {"slack", slack}};
    }
};

/// Everything one invocation produces; the manifest is built from it.
struct Run {
    std::string command;
    std::vector<std::string> args;
    ojson inputs = ojson::array();
    ojson config;
    std::string output;
    std::string extension = "txt";
    int exit_code = kOk;
    std::string message;
};

struct Options {
    Settings s;
    std::string file;
    int degree = 0;
    std::optional<int> n;
    std::string restrict_words;
    std::string functional;
    bool json = false;
    std::string map;
    std::vector<int> Ls{1, 2, 4, 8};
    std::string mode = "degree";
    int r = 1;
    std::string loop = "greatcircle";
    int power = 1;
    std::string config;
    std::string out;
    std::string manifest;
};

void add_input(Run& run, const std::string& path, const std::string& contents)
{
    run.inputs.push_back({{"path", path}, {"sha256", sha256_hex(contents)}});
}

chen::FiniteCdga load_algebra(Run& run, const std::string& path)
{
    const auto text = read_file(path);
    add_input(run, path, text);
    return chen::build_algebra(text);
}

nlohmann::json load_json(Run& run, const std::string& path)
{
    const auto text = read_file(path);
    add_input(run, path, text);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError("'" + path + "' is not valid JSON: " + e.what());
    }
}

bool is_json_path(const std::string& s) { return s.size() > 5 && s.substr(s.size() - 5) == ".json"; }

/// A catalog name (see chen::maps::by_name) or a path to a map descriptor.
chen::MapSpec load_map(Run& run, const std::string& what, int n)
{
    if (is_json_path(what))
        return chen::maps::from_json(load_json(run, what));
    return chen::maps::by_name(what, n);
}

std::string map_label(const std::string& what, const chen::MapSpec& f)
{
    return is_json_path(what) ? f.name() : what;
}

chen::Loop load_loop(Run& run, const std::string& what, int n)
{
    if (what == "greatcircle")
        return chen::great_circle_loop(n);
    if (is_json_path(what))
        return chen::Loop::from_json(load_json(run, what));
    throw InputError("unknown loop '" + what + "' (use greatcircle or a loop file)");
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep))
        if (!item.empty())
            out.push_back(item);
    return out;
}

// ---------------------------------------------------------------------------
// Subcommands

void cmd_validate(Run& run, const Options& o)
{
    const auto text = read_file(o.file);
    add_input(run, o.file, text);
    std::ostringstream os;
    try {
        const auto A = chen::build_algebra(text);
        if (o.json) {
            ojson j{{"valid", true}, {"basis_size", A.size()}, {"degree_cap", A.degree_cap()}};
            ojson degrees = ojson::object();
            for (int d = 0; d <= A.degree_cap(); ++d)
                degrees[std::to_string(d)] = A.basis_of_degree(d);
            j["basis"] = degrees;
            os << j.dump(2) << "\n";
        } else {
            os << "valid: " << A.size() << " basis elements, degree cap " << A.degree_cap() << "\n";
            for (int d = 0; d <= A.degree_cap(); ++d) {
                const auto labels = A.basis_of_degree(d);
                if (labels.empty())
                    continue;
                os << "  degree " << d << ":";
                for (const auto& l : labels)
                    os << " " << l;
                os << "\n";
            }
        }
    } catch (const chen::AlgebraInvalid& e) {
        if (o.json)
            os << ojson{{"valid", false}, {"violation", e.what()}}.dump(2) << "\n";
        else
            os << "invalid: " << e.what() << "\n";
        run.exit_code = kDomainFailure;
        run.message = e.what();
    }
    run.output = os.str();
    run.extension = o.json ? "json" : "txt";
}

/// Homotopy degree n for the exponent n − 1 + r: a class of π_n pairs with H^{n−1}(ΩX).
int homotopy_degree(const Options& o) { return o.n.value_or(o.degree + 1); }

void cmd_bar(Run& run, const Options& o)
{
    const auto A = load_algebra(run, o.file);
    std::vector<chen::BarWord> restricted;
    for (const auto& w : split(o.restrict_words, ','))
        restricted.push_back(chen::parse_word(A, w));
    const auto R = chen::cohomology(A, o.degree, o.s.max_length, restricted.empty() ? nullptr : &restricted);

    std::optional<chen::Detection> det;
    std::optional<int> exponent;
    if (R.rank > 0) {
        det = chen::min_length_detector(A, o.degree, o.s.max_length);
        if (homotopy_degree(o) >= 2)
            exponent = chen::distortion_exponent(homotopy_degree(o), det->length);
    }

    std::ostringstream os;
    if (o.json) {
        auto j = chen::report_json(A, R);
        if (det) {
            j["min_length"] = det->length;
            j["detector"] = chen::element_json(A, det->representative);
        }
        if (exponent)
            j["distortion_exponent"] = *exponent;
        os << j.dump(2) << "\n";
        run.extension = "json";
    } else {
        os << chen::report_text(A, R);
        os << "rank " << R.rank;
        if (det)
            os << "; representative " << det->representative.str(A) << "; min length " << det->length;
        if (exponent)
            os << "; distortion exponent " << *exponent;
        os << "\n";
    }
    run.output = os.str();
}

chen::BarFunctional parse_functional(const chen::FiniteCdga& A, const std::string& text)
{
    chen::BarFunctional phi;
    for (const auto& item : split(text, ',')) {
        const auto eq = item.find('=');
        const std::string word = item.substr(0, eq);
        const chen::Rational c = eq == std::string::npos ? chen::Rational(1) : chen::parse_rational(item.substr(eq + 1));
        phi[chen::parse_word(A, word)] += c;
    }
    return phi;
}

void cmd_detect(Run& run, const Options& o)
{
    const auto A = load_algebra(run, o.file);
    std::optional<chen::BarFunctional> phi;
    if (!o.functional.empty())
        phi = parse_functional(A, o.functional);
    std::ostringstream os;
    try {
        const auto det = chen::min_length_detector(A, o.degree, o.s.max_length, phi ? &*phi : nullptr);
        const int n = homotopy_degree(o);
        const int e = chen::distortion_exponent(n, det.length);
        if (o.json) {
            os << ojson{{"degree", o.degree},
                        {"n", n},
                        {"min_length", det.length},
                        {"distortion_exponent", e},
                        {"representative", chen::element_json(A, det.representative)}}
                      .dump(2)
               << "\n";
        } else {
            os << "min length " << det.length << "; distortion exponent " << e << " (O(L^" << e
               << ")); representative " << det.representative.str(A) << "\n";
        }
    } catch (const chen::NoClassFound& e) {
        os << "NoClassFound: " << e.what() << "\n";
        run.exit_code = kDomainFailure;
        run.message = e.what();
    } catch (const chen::FunctionalNotClosed& e) {
        os << "FunctionalNotClosed: " << e.what() << "\n";
        run.exit_code = kDomainFailure;
        run.message = e.what();
    }
    run.output = os.str();
    run.extension = o.json ? "json" : "txt";
}

const char* kCsvHeader = "experiment,L,value,error_estimate,suplength,volume_estimate\n";

std::string csv_row(const std::string& experiment, int L, double value, double err, double sup, double vol)
{
    return experiment + "," + std::to_string(L) + "," + fmt(value) + "," + fmt(err) + "," + fmt(sup) + "," + fmt(vol) +
           "\n";
}

void cmd_degree(Run& run, const Options& o)
{
    const std::string what = o.map.empty() ? "identity" : o.map;
    const auto f = load_map(run, what, o.n.value_or(2));
    const auto opt = o.s.quadrature(16);
    const auto p = chen::degree_via_loops(f, opt);
    const auto F = chen::desuspend(f, chen::sweepout(f.source()));
    const auto est = o.s.estimator();
    run.output = std::string(kCsvHeader) + csv_row("degree:" + map_label(what, f), 1, p.value, p.error_estimate,
                                                   chen::suplength(F, est), chen::volume_estimate(F, est));
    run.extension = "csv";
}

void cmd_hopf(Run& run, const Options& o)
{
    const std::string what = o.map.empty() ? "hopf" : o.map;
    const auto f = load_map(run, what, 2);
    const auto opt = o.s.quadrature(16);
    const auto p = chen::hopf_via_loops(f, opt);
    const auto F = chen::desuspend(f, chen::sweepout(f.source()));
    const auto est = o.s.estimator();
    run.output = std::string(kCsvHeader) + csv_row("hopf:" + map_label(what, f), 1, p.value, p.error_estimate,
                                                   chen::suplength(F, est), chen::volume_estimate(F, est));
    run.extension = "csv";
}

/// Bound checks sample many frames on long loops, so they default to fewer time cells.
constexpr int kBoundCheckTimeCells = 2;

void cmd_bound_check(Run& run, const Options& o)
{
    const int n = o.n.value_or(2);
    if (o.r < 1 || o.r > 3)
        throw InputError("--r must be 1, 2 or 3");
    if (o.power < 1)
        throw InputError("--power must be at least 1");
    const auto gamma = chen::concat_power(load_loop(run, o.loop, n), o.power);
    const std::vector<chen::FormSpec> forms(static_cast<std::size_t>(o.r), chen::FormSpec::volume(gamma.n()));
    const auto F = chen::bound_check_family(gamma, o.r);
    std::ostringstream os;
    os << "experiment,L,r,samples,length,max_lhs,rhs_at_max,max_ratio,status\n";
    try {
        const auto rep = chen::check_length_bound(forms, gamma, F, o.s.samples, o.s.seed, o.s.slack,
                                                  o.s.quadrature(kBoundCheckTimeCells));
        os << "bound-check," << o.power << "," << rep.r << "," << rep.samples << "," << fmt(rep.length) << ","
           << fmt(rep.max_lhs) << "," << fmt(rep.rhs_at_max) << "," << fmt(rep.max_ratio) << ",PASS\n";
    } catch (const chen::BoundViolated& e) {
        os << "bound-check," << o.power << "," << o.r << "," << o.s.samples << "," << fmt(gamma.length())
           << ",,,,FAIL\n";
        run.exit_code = kDomainFailure;
        run.message = e.what();
    }
    run.output = os.str();
    run.extension = "csv";
}

void cmd_sharpness(Run& run, const Options& o)
{
    chen::ScanMode mode;
    if (o.mode == "degree")
        mode = chen::ScanMode::degree;
    else if (o.mode == "hopf")
        mode = chen::ScanMode::hopf;
    else
        throw InputError("--mode must be degree or hopf");
    const auto rows = chen::sharpness_scan(o.Ls, mode, o.s.quadrature(16), o.s.estimator());
    std::string out = kCsvHeader;
    for (const auto& r : rows)
        out += csv_row(r.experiment, r.L, r.value, r.error_estimate, r.suplength, r.volume_estimate);
    run.output = out;
    run.extension = "csv";
}

// ---------------------------------------------------------------------------
// Driver

ojson manifest_json(const Run& run, const Options& o)
{
    return {{"tool", "chen"},
            {"version", kVersion},
            {"command", run.command},
            {"args", run.args},
            {"working_directory", fs::current_path().string()},
            {"config", run.config},
            {"seed", o.s.seed},
            {"threads", chen::worker_threads()},
            {"inputs", run.inputs},
            {"output", {{"format", run.extension}, {"bytes", run.output.size()}, {"sha256", sha256_hex(run.output)}}},
            {"exit_code", run.exit_code}};
}

/// Parses `args` (without the program name) and runs the selected subcommand.
/// Returns the finished run, or nullopt when the invocation was --replay or --help.
std::optional<Run> execute(const std::vector<std::string>& args, Options& o, std::string& replay_path)
{
    CLI::App app{"Bar-construction loop-space cohomology and iterated integrals on spheres", "chen"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(0, 1);
    app.add_option("--replay", replay_path, "re-run the command recorded in a manifest and compare outputs");

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON file of settings; overrides flags");
        sub->add_option("--out", o.out, "directory for the output file and manifest");
        sub->add_option("--manifest", o.manifest, "manifest path (default <out>/<command>.manifest.json)");
        sub->add_option("--seed", o.s.seed, "random seed")->capture_default_str();
    };
    auto numeric = [&](CLI::App* sub) {
        sub->add_option("--mesh", o.s.mesh, "domain cells per axis")->capture_default_str();
        sub->add_option("--order", o.s.order, "Gauss order")->capture_default_str();
        sub->add_option("--time-cells", o.s.time_cells, "time cells per smooth piece");
        sub->add_option("--mc-samples", o.s.mc_samples, "Monte Carlo nodes for r >= 4")->capture_default_str();
        sub->add_option("--est-cells", o.s.estimator_cells, "estimator grid cells")->capture_default_str();
        sub->add_option("--est-per-piece", o.s.estimator_per_piece, "estimator samples per piece")
            ->capture_default_str();
    };
    auto algebra = [&](CLI::App* sub, bool with_degree) {
        sub->add_option("file", o.file, "algebra file (JSON)")->required();
        if (with_degree) {
            sub->add_option("--degree,-d", o.degree, "bar degree")->required();
            sub->add_option("--max-length,-r", o.s.max_length, "word-length cap")->capture_default_str();
            sub->add_option("--n", o.n, "homotopy degree for the exponent (default degree + 1)");
        }
        sub->add_flag("--json", o.json, "machine-readable output");
    };

    auto* validate = app.add_subcommand("validate", "check the CDGA axioms of an algebra file");
    algebra(validate, false);
    common(validate);

    auto* bar = app.add_subcommand("bar", "bar cohomology in one degree");
    algebra(bar, true);
    bar->add_option("--restrict", o.restrict_words, "comma-separated words analysed as a separate span");
    common(bar);

    auto* detect = app.add_subcommand("detect", "minimal detecting length and distortion exponent");
    algebra(detect, true);
    detect->add_option("--functional", o.functional, "closed functional as word=coef,... (default: any class)");
    common(detect);

    auto* degree = app.add_subcommand("degree", "degree of a self-map of S^n via loops");
    degree->add_option("--map", o.map, "catalog map name or map file (default identity)");
    degree->add_option("--n", o.n, "sphere dimension (default 2)");
    numeric(degree);
    common(degree);

    auto* hopf = app.add_subcommand("hopf", "Hopf invariant of a map S^3 -> S^2 via loops");
    hopf->add_option("--map", o.map, "catalog map name or map file (default hopf)");
    numeric(hopf);
    common(hopf);

    auto* bound = app.add_subcommand("bound-check", "length bound for r-fold iterated integrals on a loop");
    bound->add_option("--r", o.r, "number of forms")->capture_default_str();
    bound->add_option("--loop", o.loop, "greatcircle or a loop file")->capture_default_str();
    bound->add_option("--power", o.power, "concatenation power")->capture_default_str();
    bound->add_option("--n", o.n, "sphere dimension (default 2)");
    bound->add_option("--samples", o.s.samples, "random frames")->capture_default_str();
    bound->add_option("--slack", o.s.slack, "relative slack on the ratio")->capture_default_str();
    numeric(bound);
    common(bound);

    auto* sharp = app.add_subcommand("sharpness", "pairings against L-fold powers of the sweepout");
    sharp->add_option("--mode", o.mode, "degree or hopf")->capture_default_str();
    sharp->add_option("--L", o.Ls, "comma-separated powers")->delimiter(',')->capture_default_str();
    numeric(sharp);
    common(sharp);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::Success& e) {
        app.exit(e);
        return std::nullopt;
    }

    if (!replay_path.empty()) {
        if (app.get_subcommands().size() > 0)
            throw InputError("--replay takes no subcommand");
        return std::nullopt;
    }
    if (app.get_subcommands().empty())
        throw InputError("a subcommand is required (see --help)");

    Run run;
    run.command = app.get_subcommands().front()->get_name();
    run.args = args;
    if (!o.config.empty())
        o.s.apply(load_json(run, o.config));
    const int default_time_cells = run.command == "bound-check" ? kBoundCheckTimeCells : 16;
    run.config = o.s.to_json(default_time_cells);

    if (run.command == "validate")
        cmd_validate(run, o);
    else if (run.command == "bar")
        cmd_bar(run, o);
    else if (run.command == "detect")
        cmd_detect(run, o);
    else if (run.command == "degree")
        cmd_degree(run, o);
    else if (run.command == "hopf")
        cmd_hopf(run, o);
    else if (run.command == "bound-check")
        cmd_bound_check(run, o);
    else
        cmd_sharpness(run, o);
    return run;
}

/// Runs `args` and maps exceptions to exit codes. The run is filled in when it completed.
int guarded(const std::vector<std::string>& args, Options& o, std::string& replay_path, std::optional<Run>& run)
{
    try {
        run = execute(args, o, replay_path);
        return run ? run->exit_code : kOk;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const chen::AlgebraInvalid& e) {
        std::cerr << "invalid: " << e.what() << "\n";
        return kDomainFailure;
    } catch (const chen::NoClassFound& e) {
        std::cerr << "NoClassFound: " << e.what() << "\n";
        return kDomainFailure;
    } catch (const chen::BoundViolated& e) {
        std::cerr << "BoundViolated: " << e.what() << "\n";
        return kDomainFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    }
}

int replay(const std::string& path)
{
    nlohmann::json m;
    try {
        m = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: '" << path << "' is not a manifest: " << e.what() << "\n";
        return kInputError;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    }
    if (m.value("tool", "") != "chen" || !m.contains("args") || !m.contains("output")) {
        std::cerr << "error: '" << path << "' is not a chen manifest\n";
        return kInputError;
    }
    if (m.contains("working_directory")) {
        std::error_code ec;
        fs::current_path(m["working_directory"].get<std::string>(), ec);
        if (ec) {
            std::cerr << "error: cannot enter " << m["working_directory"] << "\n";
            return kInputError;
        }
    }
    for (const auto& in : m.value("inputs", nlohmann::json::array())) {
        const std::string p = in.at("path");
        std::string text;
        try {
            text = read_file(p);
        } catch (const InputError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kInputError;
        }
        if (sha256_hex(text) != in.at("sha256").get<std::string>()) {
            std::cerr << "error: input '" << p << "' changed since the manifest was written\n";
            return kInputError;
        }
    }
    ::setenv("CHEN_THREADS", std::to_string(m.at("threads").get<unsigned>()).c_str(), 1);

    Options o;
    std::string nested;
    std::optional<Run> run;
    const int code = guarded(m.at("args").get<std::vector<std::string>>(), o, nested, run);
    if (!run) {
        std::cerr << "replay: the recorded command did not complete\n";
        return code == kOk ? kInputError : code;
    }
    std::cout << run->output;
    const std::string expected = m["output"].at("sha256");
    const bool same = sha256_hex(run->output) == expected && run->exit_code == m.value("exit_code", 0);
    std::cerr << (same ? "replay: identical" : "replay: output differs") << " (sha256 " << sha256_hex(run->output)
              << ")\n";
    return same ? kOk : kDomainFailure;
}

} // namespace

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    Options o;
    std::string replay_path;
    std::optional<Run> run;
    const int code = guarded(args, o, replay_path, run);
    if (!replay_path.empty() && !run && code == kOk)
        return replay(replay_path);
    if (!run)
        return code;

    std::cout << run->output;
    if (!run->message.empty())
        std::cerr << run->message << "\n";
    try {
        const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
        if (!o.out.empty())
            write_file(dir / (run->command + "." + run->extension), run->output);
        const fs::path manifest = o.manifest.empty() ? dir / (run->command + ".manifest.json") : fs::path(o.manifest);
        write_file(manifest, manifest_json(*run, o).dump(2) + "\n");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    }
    return run->exit_code;
}
