// Acceptance run: one PASS/FAIL line per criterion, exit 0 iff all pass.

#include <chen/bar.hpp>
#include <chen/itint.hpp>

#include "oracles.hpp"

#include <nlohmann/json.hpp>

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

using namespace chen;
namespace fs = std::filesystem;

namespace {

const oracle::V3 kRegularValue{0.3137, 0.1729, -0.9291};
const oracle::V3 kLinkP{0.2, 0.1, -0.97}, kLinkQ{-0.15, 0.22, -0.96};

/// Pairings collected by criteria 5, 6 and 8 for the volume bound in criterion 9.
struct RecordedPairing {
    std::string label;
    std::vector<PairTerm> terms;
    LoopFamily family;
    double value;
};
std::vector<RecordedPairing> recorded;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

struct CliResult {
    int code = -1;
    std::string out;
};

CliResult cli(const std::string& args)
{
    const std::string cmd = std::string(CHEN_CLI_PATH) + " " + args + " 2>/dev/null";
    CliResult r;
    FILE* p = ::popen(cmd.c_str(), "r");
    if (!p)
        return r;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, p)) > 0)
        r.out.append(buf, n);
    const int status = ::pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string model(const std::string& name) { return std::string(CHEN_SOURCE_DIR) + "/models/" + name; }

fs::path scratch_dir()
{
    const auto dir = fs::temp_directory_path() / "chen_acceptance";
    fs::create_directories(dir);
    return dir;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<BarWord> words(const FiniteCdga& A, std::initializer_list<const char*> list)
{
    std::vector<BarWord> out;
    for (const char* w : list)
        out.push_back(parse_word(A, w));
    return out;
}

BarElement single(const FiniteCdga& A, const char* word)
{
    BarElement x;
    x.add(parse_word(A, word), 1);
    return x;
}

// ---------------------------------------------------------------------------

/// d² = 0 on bar words, and the CDGA axioms checked element by element.
void criterion1(Outcome& o)
{
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::pair<std::string, FiniteCdga>> algebras{{"two-cell", two_cell_nonformal_model()}};
    for (int n = 2; n <= 5; ++n)
        algebras.emplace_back("S^" + std::to_string(n), sphere_model(n));
    for (int n = 1; n <= 3; ++n)
        algebras.emplace_back("CP^" + std::to_string(n), cpn_model(n));

    std::size_t words_checked = 0, triples = 0;
    for (const auto& [name, A] : algebras) {
        for (int d = 0; d <= 14; ++d)
            for (const auto& w : bar_basis(A, d, 14)) {
                ++words_checked;
                if (!d_squared_vanishes(A, w))
                    o.require(false, name + ": d² on " + render_word(A, w));
            }
        std::vector<Element> basis;
        for (std::size_t i = 0; i < A.size(); ++i)
            basis.push_back(Element::basis(A, A.label(i)));
        for (const auto& x : basis) {
            if (!differential(differential(x)).is_zero())
                o.require(false, name + ": d² on " + x.str());
            for (const auto& y : basis) {
                const int sign = (x.degree() * y.degree()) % 2 ? -1 : 1;
                if (multiply(x, y).coefficients() != (multiply(y, x) * Rational(sign)).coefficients())
                    o.require(false, name + ": graded commutativity");
                const Rational leibniz_sign = x.degree() % 2 ? -1 : 1;
                const auto lhs = differential(multiply(x, y));
                const auto rhs = multiply(differential(x), y) + multiply(x, differential(y)) * leibniz_sign;
                if (lhs.coefficients() != rhs.coefficients())
                    o.require(false, name + ": Leibniz on " + x.str() + ", " + y.str());
                for (const auto& z : basis) {
                    ++triples;
                    if (multiply(multiply(x, y), z).coefficients() != multiply(x, multiply(y, z)).coefficients())
                        o.require(false, name + ": associativity");
                }
            }
        }
    }
    const double t = seconds_since(t0);
    o.require(t < 10, "runtime under 10 s");
    o.detail << algebras.size() << " algebras, " << words_checked << " bar words, " << triples << " triples, "
             << std::fixed << std::setprecision(2) << t << " s";
}

void criterion2(Outcome& o)
{
    const auto A = two_cell_nonformal_model();
    const auto restricted = words(A, {"a|w", "a|z", "b|w", "b|z", "y|ab", "a|ab|b", "a|a|ab", "ab|b|b"});
    const auto R = cohomology(A, 9, 6, &restricted);
    const auto det = min_length_detector(A, 9, 6);
    const int e = distortion_exponent(10, det.length);
    o.require(R.rank == 1, "rank 1");
    o.require(det.length == 2, "r = 2");
    o.require(cohomologous_up_to_scalar(A, 9, 6, det.representative, single(A, "a|z")), "representative ~ ∫ω_a ω_z");
    o.require(e == 11, "exponent 11");
    const auto text = cli("bar " + model("two_cell_nonformal.json") + " --degree 9 --max-length 6 --restrict " +
                          "'a|w,a|z,b|w,b|z,y|ab,a|ab|b,a|a|ab,ab|b|b' --manifest " +
                          (scratch_dir() / "c2.json").string());
    o.require(text.code == 0 &&
                  text.out.find("rank 1; representative ∫ω_a ω_z; min length 2; distortion exponent 11") !=
                      std::string::npos,
              "CLI summary line");
    const bool flagged = text.out.find("differs from full enumeration") != std::string::npos;
    const auto& rc = *R.restricted;
    o.detail << "rank " << R.rank << ", r = " << det.length << ", O(L^" << e << "), representative "
             << det.representative.str(A) << "; chains/cocycles/coboundaries full " << R.dim_chains << "/"
             << R.dim_cocycles << "/" << R.dim_coboundaries << ", listed basis " << rc.chains << "/" << rc.cocycles
             << "/" << rc.coboundaries << (flagged ? " (flagged as differing)" : "");
    const bool differs =
        rc.chains != R.dim_chains || rc.cocycles != R.dim_cocycles || rc.coboundaries != R.dim_coboundaries;
    o.require(rc.chains == 8 && rc.cocycles == 7 && rc.coboundaries == 6, "listed counts 8/7/6");
    o.require(flagged == differs, "report flags the difference");
}

void criterion3(Outcome& o)
{
    const auto want3 = oracle::sphere_loop_betti(3, 8);
    const auto want2 = oracle::sphere_loop_betti(2, 6);
    for (int d = 0; d <= 8; ++d)
        o.require(want3[static_cast<std::size_t>(d)] == (d % 2 == 0 ? 1 : 0), "oracle table for S^3");
    for (int d = 0; d <= 6; ++d)
        o.require(want2[static_cast<std::size_t>(d)] == 1, "oracle table for S^2");
    const auto S3 = sphere_model(3), S2 = sphere_model(2);
    std::ostringstream r3, r2;
    for (int d = 0; d <= 8; ++d) {
        const auto rank = static_cast<long>(cohomology(S3, d, 8).rank);
        r3 << rank;
        o.require(rank == want3[static_cast<std::size_t>(d)], "S^3 degree " + std::to_string(d));
    }
    for (int d = 0; d <= 6; ++d) {
        const auto rank = static_cast<long>(cohomology(S2, d, 8).rank);
        r2 << rank;
        o.require(rank == want2[static_cast<std::size_t>(d)], "S^2 degree " + std::to_string(d));
    }
    o.detail << "S^3 ranks 0..8 = " << r3.str() << ", S^2 ranks 0..6 = " << r2.str();
}

void criterion4(Outcome& o)
{
    const auto want = oracle::cpn_loop_betti(2, 8);
    o.require(want == std::vector<long>{1, 1, 0, 0, 1, 1, 0, 0, 1}, "oracle table");
    const auto A = cpn_model(2);
    std::ostringstream ranks;
    for (int d = 0; d <= 8; ++d) {
        const auto rank = static_cast<long>(cohomology(A, d, 8).rank);
        ranks << rank;
        o.require(rank == want[static_cast<std::size_t>(d)], "degree " + std::to_string(d));
    }
    const auto w = single(A, "w|w2");
    o.require(bar_differential(A, w).is_zero(), "∫ωω² is a cocycle");
    const auto R = cohomology(A, 4, 8);
    o.require(R.rank == 1 && cohomologous_up_to_scalar(A, 4, 8, R.representatives.at(0), w), "∫ωω² generates");
    const auto det = cli("detect " + model("cp_2.json") + " --degree 4 --n 5 --json --manifest " +
                         (scratch_dir() / "c4.json").string());
    int exponent = -1;
    if (det.code == 0)
        exponent = nlohmann::json::parse(det.out).at("distortion_exponent").get<int>();
    o.require(exponent == 6, "detect exponent 6");
    o.detail << "ranks 0..8 = " << ranks.str() << ", detect exponent " << exponent;
}

void criterion5(Outcome& o)
{
    const auto t0 = std::chrono::steady_clock::now();
    const QuadratureOptions base;
    const auto id = degree_via_loops(maps::identity(2), base);
    o.require(std::abs(id.value - 1) <= 1e-3, "identity");
    recorded.push_back({"degree identity", single_term({FormSpec::volume(2)}),
                        desuspend(maps::identity(2), sweepout(2)), id.value});
    o.detail << std::setprecision(6) << "id " << id.value;
    for (int k : {2, 3, 5}) {
        const auto f = maps::suspension_power(2, k);
        const int expected = oracle::degree_by_preimages(f, kRegularValue, 48);
        const auto p = degree_via_loops(f, base);
        o.require(expected == k, "preimage oracle for k = " + std::to_string(k));
        o.require(std::abs(p.value - expected) <= 1e-2, "suspension k = " + std::to_string(k));
        recorded.push_back({"degree suspension-" + std::to_string(k), single_term({FormSpec::volume(2)}),
                            desuspend(f, sweepout(2)), p.value});
        o.detail << ", k=" << k << " " << p.value << " (oracle " << expected << ")";
    }
    const double t = seconds_since(t0);
    o.require(t < 60, "runtime under 60 s");
    o.detail << ", " << std::fixed << std::setprecision(2) << t << " s";
}

void criterion6(Outcome& o)
{
    const double lk = oracle::hopf_by_linking(maps::hopf(), kLinkP, kLinkQ, 4.0, 32);
    const auto t0 = std::chrono::steady_clock::now();
    const auto h = hopf_via_loops(maps::hopf());
    const double t = seconds_since(t0);
    const auto w = FormSpec::volume(2);
    recorded.push_back({"hopf", single_term({w, w}), desuspend(maps::hopf(), sweepout(3)), h.value});
    o.require(std::abs(lk - 1) <= 1e-6, "linking oracle gives 1");
    o.require(std::abs(h.value - lk) <= 5e-2, "hopf_via_loops within 5e-2");
    o.require(t < 600, "runtime under 10 min");
    o.detail << std::setprecision(6) << "hopf " << h.value << " ± " << h.error_estimate << ", linking oracle " << lk
             << ", " << std::fixed << std::setprecision(2) << t << " s";
}

void criterion7(Outcome& o)
{
    QuadratureOptions opt;
    opt.time_cells = 2;
    const auto w = FormSpec::volume(2);
    double worst = 0, lhs1 = 0, worst_scaling = 0;
    for (int r : {1, 2}) {
        const std::vector<FormSpec> forms(static_cast<std::size_t>(r), w);
        for (int L : {1, 2, 4, 8, 16}) {
            const auto g = concat_power(great_circle_loop(2), L);
            try {
                const auto rep = check_length_bound(forms, g, bound_check_family(g, r), 200,
                                                    static_cast<unsigned>(100 * r + L), 1e-9, opt);
                worst = std::max(worst, rep.max_ratio);
                if (r == 2) {
                    if (L == 1)
                        lhs1 = rep.max_lhs;
                    const double scaling = rep.max_lhs / (lhs1 * L * L);
                    worst_scaling = std::max(worst_scaling, std::abs(scaling - 1));
                }
            } catch (const BoundViolated& e) {
                o.require(false, e.what());
            }
        }
    }
    o.require(worst <= 1 + 1e-9, "max ratio ≤ 1 + 1e-9");
    o.require(worst_scaling <= 0.05, "left side for r = 2 scales as L²");
    o.detail << std::setprecision(6) << "max ratio " << worst << ", r=2 left side / (L² · value at L=1) within "
             << worst_scaling << " of 1";
}

void criterion8(Outcome& o)
{
    const QuadratureOptions base;
    const auto deg = sharpness_scan({1, 2, 4, 8}, ScanMode::degree, base);
    double lin = 0, drift = 0;
    for (const auto& r : deg) {
        lin = std::max(lin, std::abs(r.value / (r.L * deg[0].value) - 1));
        drift = std::max(drift, std::abs(r.volume_estimate / deg[0].volume_estimate - 1));
        recorded.push_back({"sharpness degree L=" + std::to_string(r.L), scan_terms(ScanMode::degree),
                            scan_family(ScanMode::degree, r.L), r.value});
    }
    const auto hopf = sharpness_scan({1, 2, 3}, ScanMode::hopf, base);
    double quad = 0;
    for (const auto& r : hopf) {
        quad = std::max(quad, std::abs(r.value / (r.L * r.L * hopf[0].value) - 1));
        recorded.push_back({"sharpness hopf L=" + std::to_string(r.L), scan_terms(ScanMode::hopf),
                            scan_family(ScanMode::hopf, r.L), r.value});
    }
    o.require(lin <= 1e-2, "degree mode linear within 1%");
    o.require(drift < 5e-2, "volume estimate drift under 5%");
    o.require(quad <= 2e-2, "hopf mode quadratic within 2%");
    o.detail << std::setprecision(4) << "degree values";
    for (const auto& r : deg)
        o.detail << " " << r.value;
    o.detail << " (linearity dev " << lin << ", volume drift " << drift << "); hopf values";
    for (const auto& r : hopf)
        o.detail << " " << r.value;
    o.detail << " (L² dev " << quad << ")";
}

void criterion9(Outcome& o)
{
    std::vector<std::pair<MapSpec, FormSpec>> cases;
    for (double a : {0.3, 1.1, 2.9})
        cases.emplace_back(maps::rotation(2, a), FormSpec::volume(2));
    cases.emplace_back(maps::rotation(3, 0.8, 1, 3), FormSpec::volume(3));
    cases.emplace_back(maps::identity(2), FormSpec::volume(2));
    cases.emplace_back(maps::reflection(3), FormSpec::volume(3));
    for (int k : {2, 3, 5})
        cases.emplace_back(maps::suspension_power(2, k), FormSpec::volume(2));
    cases.emplace_back(maps::dilation(2, 3), FormSpec::volume(2));
    cases.emplace_back(maps::hopf(), FormSpec::volume(2));
    cases.emplace_back(maps::hopf_degree2(), FormSpec::volume(2));
    cases.emplace_back(maps::constant(3, 2), FormSpec::volume(2));
    double worst = 0;
    unsigned seed = 1;
    for (const auto& [f, alpha] : cases) {
        try {
            worst = std::max(worst, lipschitz_pullback_check(f, alpha, 500, seed++).max_ratio);
        } catch (const BoundViolated& e) {
            o.require(false, e.what());
        }
    }
    o.require(worst <= 1 + 1e-9, "pullback ratio ≤ 1 + 1e-9");

    double tightest = 0;
    for (const auto& p : recorded) {
        const auto b = volume_bound(p.terms, p.family, p.value);
        if (!b.holds)
            o.require(false, "volume bound for " + p.label);
        tightest = std::max(tightest, std::abs(b.pairing) / b.bound);
    }
    o.require(!recorded.empty(), "pairings recorded by criteria 5-8");
    o.detail << std::setprecision(6) << cases.size() << " maps, max pullback ratio " << worst << "; "
             << recorded.size() << " pairings within the volume bound (largest |pairing|/bound " << tightest << ")";
}

void criterion10(Outcome& o)
{
    ::setenv("CHEN_THREADS", "2", 1);
    const auto dir = scratch_dir();
    const std::vector<std::string> commands{
        "validate " + model("two_cell_nonformal.json"),
        "bar " + model("two_cell_nonformal.json") + " --degree 9 --max-length 6",
        "bar " + model("two_cell_nonformal.json") + " --degree 9 --json",
        "detect " + model("cp_2.json") + " --degree 4",
        "degree --map suspension-3",
        "hopf --map hopf --mesh 8 --time-cells 8",
        "bound-check --r 2 --loop greatcircle --power 5",
        "sharpness --mode degree --L 1,2,4,8",
        "sharpness --mode hopf --L 1,2 --mesh 8 --time-cells 8",
    };
    int i = 0;
    for (const auto& c : commands) {
        const auto manifest = dir / ("run" + std::to_string(i++) + ".manifest.json");
        const auto first = cli(c + " --manifest " + manifest.string());
        const auto again = cli("--replay " + manifest.string());
        if (first.code != 0 || again.code != 0 || first.out != again.out || first.out.empty())
            o.require(false, c);
    }
    ::unsetenv("CHEN_THREADS");
    o.detail << commands.size() << " commands replayed from their manifests at 2 threads";
}

} // namespace

int main()
{
    const std::vector<std::pair<int, std::function<void(Outcome&)>>> criteria{
        {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},  {5, criterion5},
        {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10},
    };
    int failures = 0;
    for (const auto& [n, run] : criteria) {
        Outcome o;
        try {
            run(o);
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        failures += o.pass ? 0 : 1;
        std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail.str() << std::endl;
    }
    std::cout << (failures == 0 ? "all criteria PASS" : std::to_string(failures) + " criteria FAIL") << std::endl;
    return failures == 0 ? 0 : 1;
}
