#pragma once

// Command-line front end. run_cli() parses argv, dispatches to one
// subcommand and maps failures to exit codes: 0 success, 2 invalid input or
// violated precondition, 1 internal error.

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ruelle/bohr.hpp"
#include "ruelle/cascade.hpp"
#include "ruelle/duality.hpp"
#include "ruelle/errors.hpp"
#include "ruelle/format.hpp"
#include "ruelle/io.hpp"
#include "ruelle/keane.hpp"
#include "ruelle/reproduce.hpp"
#include "ruelle/transfer.hpp"

namespace ruelle::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitInvalid = 2;

struct RunConfig {
    std::string filter_path;
    std::string h_path;
    std::string base_path;
    std::string map_path;
    std::string poly;
    std::string init = "unitbox";
    std::string out_path;
    std::string format;
    int p = 3;
    int n = 2;
    std::optional<int> k;
    int jmax = 2;
    int grid = 256;
    int bins = 64;
    int depth = 25;
    int iters = 10;
    int nmax = 4;
    int kmax = 2;
    std::size_t samples = 1000;
    std::optional<std::uint64_t> seed;
    double eps = 1e-9;
};

namespace detail {

using io::json;

inline std::string num(double x) { return format_number(x); }

inline FilterSpec load_filter(const std::string& path) { return io::filter_from_json(io::read_json_file(path)); }
inline LaurentPoly load_poly(const std::string& path) { return io::poly_from_json(io::read_json_file(path)); }

/// Writes `text` to the --out file when one is given, else to `out`.
inline void emit(const RunConfig& cfg, std::ostream& out, const std::string& text) {
    if (cfg.out_path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(cfg.out_path, std::ios::binary);
    if (!f) throw ContractError("cannot write '" + cfg.out_path + "'");
    f << text;
    if (!f) throw std::runtime_error("write to '" + cfg.out_path + "' failed");
}

inline void require_format(const RunConfig& cfg, std::initializer_list<const char*> allowed) {
    if (cfg.format.empty()) return;
    for (const char* a : allowed)
        if (cfg.format == a) return;
    throw ContractError("--format " + cfg.format + " is not supported by this subcommand");
}

inline bool wants_json(const RunConfig& cfg) { return cfg.format == "json"; }

inline std::vector<double> parse_coefficients(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw ContractError("bad coefficient '" + item + "'");
        }
        if (item.find_first_not_of(" \t", used) != std::string::npos) throw ContractError("bad coefficient '" + item + "'");
        if (!std::isfinite(v)) throw ContractError("coefficients must be finite");
        out.push_back(v);
    }
    return out;
}

inline GridFunction initial_grid(int N, const std::string& init) {
    if (init == "unitbox") return GridFunction::box(N, 0, 1);
    // box:lo:hi with integer endpoints
    if (init.rfind("box:", 0) == 0) {
        const auto mid = init.find(':', 4);
        if (mid == std::string::npos) throw ContractError("--init box needs box:lo:hi");
        try {
            return GridFunction::box(N, std::stoll(init.substr(4, mid - 4)), std::stoll(init.substr(mid + 1)));
        } catch (const std::logic_error&) {
            throw ContractError("bad --init '" + init + "'");
        }
    }
    throw ContractError("unknown --init '" + init + "' (use unitbox or box:lo:hi)");
}

// ---------------------------------------------------------------------------
// Subcommands

inline int cmd_check(const RunConfig& cfg, std::ostream& out) {
    require_format(cfg, {"text", "json"});
    const FilterSpec f = load_filter(cfg.filter_path);
    const bool q = check_quadrature(f);
    const bool lp = check_lowpass(f);
    if (wants_json(cfg))
        emit(cfg, out, json{{"N", f.scale}, {"quadrature", q}, {"lowpass", lp}}.dump(2) + "\n");
    else
        emit(cfg, out, std::string("quadrature=") + (q ? "true" : "false") + " lowpass=" + (lp ? "true" : "false") + "\n");
    return kExitOk;
}

inline int cmd_eigenspace(const RunConfig& cfg, std::ostream& out) {
    require_format(cfg, {"text", "json"});
    const EigenReport rep = fixed_space(load_filter(cfg.filter_path));
    if (wants_json(cfg)) {
        emit(cfg, out, io::to_json(rep).dump(2) + "\n");
        return kExitOk;
    }
    std::ostringstream os;
    os << "dimension=" << rep.dimension << " pure=" << (rep.pure ? "true" : "false") << '\n'
       << "window=" << rep.window << " spectral_radius_estimate=" << num(rep.spectral_radius_estimate) << '\n';
    for (std::size_t i = 0; i < rep.basis.size(); ++i) {
        os << "basis[" << i << "] residual=" << num(rep.residuals[i]) << " lo=" << rep.basis[i].lo() << " coeffs=";
        for (std::size_t t = 0; t < rep.basis[i].size(); ++t) {
            const cplx a = rep.basis[i].coeffs()[t];
            os << (t ? " " : "") << num(a.real());
            if (a.imag() != 0.0) os << (a.imag() < 0 ? "" : "+") << num(a.imag()) << 'i';
        }
        os << '\n';
    }
    emit(cfg, out, os.str());
    return kExitOk;
}

inline int cmd_cascade(const RunConfig& cfg, std::ostream& out) {
    require_format(cfg, {"csv"});
    const FilterSpec f = load_filter(cfg.filter_path);
    if (cfg.iters < 0) throw ContractError("--iters must be >= 0");
    const CascadeRun run = cascade_iterate(f, initial_grid(f.scale, cfg.init), cfg.iters);
    std::ostringstream csv;
    run.phi.write_csv(csv);
    emit(cfg, out, csv.str());
    if (!cfg.out_path.empty())
        out << "iterations=" << run.iterations << " level=" << run.phi.level() << " cells=" << run.phi.values().size()
            << " residual=" << num(refinement_residual(f, run.phi)) << " diverged=" << (run.diverged ? "true" : "false")
            << " level_capped=" << (run.level_capped ? "true" : "false") << '\n';
    return kExitOk;
}

inline int cmd_moments(const RunConfig& cfg, std::ostream& out) {
    require_format(cfg, {"csv"});
    const FilterSpec f = load_filter(cfg.filter_path);
    const HarmonicDensity hd = make_harmonic_density(f, load_poly(cfg.h_path));
    if (cfg.n < 0 || cfg.jmax < 0) throw ContractError("--n and --jmax must be >= 0");
    std::ostringstream csv;
    csv << "k,n,f,re,im\n";
    for (int n = 0; n <= cfg.n; ++n)
        for (int k = 0; k <= n; ++k) {
            if (cfg.k && *cfg.k != k) continue;
            for (int j = -cfg.jmax; j <= cfg.jmax; ++j) {
                const cplx m = moment(f, hd.h, k, n, LaurentPoly::monomial(j));
                csv << k << ',' << n << ',' << j << ',' << num(m.real()) << ',' << num(m.imag()) << '\n';
            }
        }
    emit(cfg, out, csv.str());
    return kExitOk;
}

inline int cmd_cocycle(const RunConfig& cfg, std::ostream& out) {
    require_format(cfg, {"csv"});
    const FilterSpec f = load_filter(cfg.filter_path);
    const HarmonicDensity hd = make_harmonic_density(f, load_poly(cfg.h_path));
    const CocycleResult res = cocycle_transform(f, hd.h, cfg.grid, cfg.eps);
    std::ostringstream csv;
    csv << "omega,re,im,admissible\n";
    for (const auto& s : res.samples)
        csv << num(s.omega) << ',' << num(s.value.real()) << ',' << num(s.value.imag()) << ',' << (s.admissible ? 1 : 0)
            << '\n';
    emit(cfg, out, csv.str());
    if (!cfg.out_path.empty())
        out << "admissible_points=" << res.admissible_points << " fibers_checked=" << res.fibers_checked
            << " quadrature_residual=" << num(res.quadrature_residual) << '\n';
    return kExitOk;
}

inline int cmd_cuntz(const RunConfig& cfg, std::ostream& out) {
    require_format(cfg, {"text", "json"});
    if (!cfg.seed) throw ContractError("--seed is required for sampling subcommands");
    const FilterSpec f = certify(load_filter(cfg.filter_path));
    if (!f.quadrature) throw ContractError("the Cuntz relations need a quadrature filter");
    RngStream rng(CounterRng(*cfg.seed), 0);
    double adj = 0.0, sum = 0.0;
    const std::size_t trials = cfg.samples;
    for (std::size_t t = 0; t < trials; ++t) {
        std::vector<cplx> c;
        for (int n = -6; n <= 6; ++n) c.emplace_back(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        const LaurentPoly x(-6, std::move(c));
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                adj = std::max(adj, max_coeff_diff(cuntz_s_adjoint(f, i, cuntz_s(f, j, x)), i == j ? x : LaurentPoly{}));
        const LaurentPoly s = cuntz_s(f, 0, cuntz_s_adjoint(f, 0, x)) + cuntz_s(f, 1, cuntz_s_adjoint(f, 1, x));
        sum = std::max(sum, max_coeff_diff(s, x));
    }
    if (wants_json(cfg))
        emit(cfg, out,
             json{{"inputs", trials}, {"adjoint_error", io::rounded(adj)}, {"completeness_error", io::rounded(sum)}}.dump(2) +
                 "\n");
    else
        emit(cfg, out, "inputs=" + std::to_string(trials) + " adjoint_error=" + num(adj) + " completeness_error=" + num(sum) + "\n");
    return kExitOk;
}

inline int cmd_duality(const RunConfig& cfg, std::ostream& out) {
    require_format(cfg, {"json"});
    const FilterSpec base = load_filter(cfg.base_path);
    const int p = cfg.p;
    const OrbitDecomposition od = orbits(base.scale, p);
    const DimensionCount dc = dimension_vs_orbits(base, p);
    const ReciprocityReport rc = reciprocity_check(base, p);
    const EigenReport up = fixed_space(make_filter(base.scale, compose_power(base.m0, p)));
    json twisted = json::array(), literal = json::array();
    for (int k = 0; k < p; ++k) {
        double tw = 0.0, lit = 0.0;
        for (const auto& v : up.basis) {
            const IntertwineReport ir = intertwine_residual(base, v, p, k);
            tw = std::max(tw, ir.twisted);
            lit = std::max(lit, ir.literal);
        }
        twisted.push_back(io::rounded(tw));
        literal.push_back(io::rounded(lit));
    }
    const json j{{"N", base.scale},
                 {"p", p},
                 {"orbits", od.orbits},
                 {"periods", od.periods},
                 {"dim", dc.dimension},
                 {"orbit_count", dc.orbit_count},
                 {"base_pure", dc.base_pure},
                 {"equal", dc.equal},
                 {"reciprocity", rc.holds},
                 {"residuals", {{"twisted", twisted}, {"literal", literal}, {"reciprocity", io::rounded(rc.residual)}}}};
    emit(cfg, out, j.dump(2) + "\n");
    return kExitOk;
}

inline int cmd_julia(const RunConfig& cfg, std::ostream& out) {
    require_format(cfg, {"csv"});
    if (!cfg.seed) throw ContractError("--seed is required for sampling subcommands");
    if (cfg.depth < 1) throw ContractError("--depth must be >= 1");
    const JuliaSystem js = julia_bracket(RealPolynomial(parse_coefficients(cfg.poly)));
    const auto pts = backward_sample(js, js.b, cfg.depth, cfg.samples, *cfg.seed);
    std::ostringstream csv;
    csv << "x\n";
    for (double x : pts) csv << num(x) << '\n';
    emit(cfg, out, csv.str());
    if (!cfg.out_path.empty())
        out << "degree=" << js.degree() << " a=" << num(js.a) << " b=" << num(js.b) << " case=" << to_string(js.kind)
            << " samples=" << pts.size() << '\n';
    return kExitOk;
}

inline int cmd_ulam(const RunConfig& cfg, std::ostream& out) {
    require_format(cfg, {"csv"});
    const MarkovMap map = io::markov_from_json(io::read_json_file(cfg.map_path));
    const UlamResult res = ulam_fixed_density(map, cfg.bins);
    std::ostringstream csv;
    csv << "x,density\n";
    for (std::size_t i = 0; i < res.density.size(); ++i)
        csv << num(static_cast<double>(i) / cfg.bins) << ',' << num(res.density[i]) << '\n';
    emit(cfg, out, csv.str());
    if (!cfg.out_path.empty())
        out << "bins=" << cfg.bins << " steps=" << res.steps << " residual=" << num(res.residual)
            << " min=" << num(res.min_entry) << '\n';
    return kExitOk;
}

inline int cmd_bohr(const RunConfig& cfg, std::ostream& out) {
    require_format(cfg, {"csv"});
    const FilterSpec f = load_filter(cfg.filter_path);
    const MomentKernel K(f, load_poly(cfg.h_path));
    if (cfg.nmax < 0 || cfg.kmax < 0) throw ContractError("--nmax and --kmax must be >= 0");
    std::ostringstream csv;
    csv << "n,k,re,im\n";
    for (int k = 0; k <= cfg.kmax; ++k)
        for (int n = -cfg.nmax; n <= cfg.nmax; ++n) {
            const cplx v = K(NadicRational{f.scale, n, k});
            csv << n << ',' << k << ',' << num(v.real()) << ',' << num(v.imag()) << '\n';
        }
    emit(cfg, out, csv.str());
    const PsdReport rep = psd_check(K, nadic_grid(f.scale, cfg.nmax, cfg.kmax));
    out << json{{"size", rep.gram.rows()},
                {"min_eigenvalue", io::rounded(rep.min_eigenvalue)},
                {"hermitian_discrepancy", io::rounded(rep.hermitian_discrepancy)},
                {"pass", rep.pass}}
               .dump()
        << '\n';
    return kExitOk;
}

inline int cmd_reproduce(std::ostream& out) {
    const auto results = acceptance::run_all();
    std::size_t passed = 0;
    for (const auto& r : results) {
        out << acceptance::format_line(r, false) << '\n';
        passed += r.pass ? 1 : 0;
    }
    out << passed << '/' << results.size() << " passed\n";
    return passed == results.size() ? kExitOk : kExitInternal;
}

}  // namespace detail

/// Entry point shared by the executable and the tests.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Transfer operators of wavelet filters and expanding maps"};
    app.set_help_flag("--help", "print this help and exit");
    app.require_subcommand(1);
    app.fallthrough(false);
    RunConfig cfg;

    auto add_out = [&](CLI::App* s) {
        s->add_option("--out", cfg.out_path, "write the primary result to this file");
    };
    auto add_format = [&](CLI::App* s) {
        s->add_option("--format", cfg.format, "output format")->check(CLI::IsMember({"text", "json", "csv"}));
    };
    auto add_filter = [&](CLI::App* s) {
        s->add_option("--filter", cfg.filter_path, "filter JSON {\"N\", \"m0\"}")->required()->check(CLI::ExistingFile);
    };
    auto add_h = [&](CLI::App* s) {
        s->add_option("--h", cfg.h_path, "density JSON {\"lo\", \"coeffs\"}")->required()->check(CLI::ExistingFile);
    };

    std::map<std::string, std::function<int()>> handlers;
    auto sub = [&](const std::string& name, const std::string& help) {
        CLI::App* s = app.add_subcommand(name, help);
        s->set_help_flag("--help", "print this help and exit");
        add_out(s);
        add_format(s);
        return s;
    };

    auto* check = sub("check", "quadrature and low-pass predicates");
    add_filter(check);
    handlers["check"] = [&] { return detail::cmd_check(cfg, out); };

    auto* eig = sub("eigenspace", "fixed space of the transfer operator");
    add_filter(eig);
    handlers["eigenspace"] = [&] { return detail::cmd_eigenspace(cfg, out); };

    auto* cas = sub("cascade", "cascade iteration of a grid function");
    add_filter(cas);
    cas->add_option("--iters", cfg.iters, "number of cascade steps");
    cas->add_option("--init", cfg.init, "unitbox or box:lo:hi");
    handlers["cascade"] = [&] { return detail::cmd_cascade(cfg, out); };

    auto* mom = sub("moments", "table of state moments");
    add_filter(mom);
    add_h(mom);
    mom->add_option("--n", cfg.n, "largest n");
    mom->add_option("--k", cfg.k, "only this k (default all 0..n)");
    mom->add_option("--jmax", cfg.jmax, "multipliers e_j for |j| <= jmax");
    handlers["moments"] = [&] { return detail::cmd_moments(cfg, out); };

    auto* coc = sub("cocycle", "cocycle transform of a filter by a harmonic density");
    add_filter(coc);
    add_h(coc);
    coc->add_option("--grid", cfg.grid, "grid size")->check(CLI::PositiveNumber);
    coc->add_option("--eps", cfg.eps, "exclusion threshold for h(z^N)");
    handlers["cocycle"] = [&] { return detail::cmd_cocycle(cfg, out); };

    auto* cun = sub("cuntz", "Cuntz relations on random inputs");
    add_filter(cun);
    cun->add_option("--samples", cfg.samples, "number of random inputs");
    cun->add_option("--seed", cfg.seed, "64-bit seed")->required();
    handlers["cuntz"] = [&] { return detail::cmd_cuntz(cfg, out); };

    auto* dua = sub("duality", "upsampled filter, orbits and intertwining");
    dua->add_option("--base", cfg.base_path, "base filter JSON")->required()->check(CLI::ExistingFile);
    dua->add_option("--p", cfg.p, "upsampling factor, coprime to N")->check(CLI::PositiveNumber);
    handlers["duality"] = [&] { return detail::cmd_duality(cfg, out); };

    auto* jul = sub("julia", "balanced-measure samples on a real Julia set");
    jul->add_option("--poly", cfg.poly, "monic coefficients, highest degree first")->required();
    jul->add_option("--samples", cfg.samples, "number of points");
    jul->add_option("--depth", cfg.depth, "backward iteration depth");
    jul->add_option("--seed", cfg.seed, "64-bit seed")->required();
    handlers["julia"] = [&] { return detail::cmd_julia(cfg, out); };

    auto* ula = sub("ulam", "invariant density of a Markov map");
    ula->add_option("--map", cfg.map_path, "map JSON")->required()->check(CLI::ExistingFile);
    ula->add_option("--bins", cfg.bins, "number of bins");
    handlers["ulam"] = [&] { return detail::cmd_ulam(cfg, out); };

    auto* boh = sub("bohr", "moment kernel on N-adic rationals");
    add_filter(boh);
    add_h(boh);
    boh->add_option("--nmax", cfg.nmax, "numerators |n| <= nmax");
    boh->add_option("--kmax", cfg.kmax, "depths k <= kmax");
    handlers["bohr"] = [&] { return detail::cmd_bohr(cfg, out); };

    app.add_subcommand("reproduce-paper", "run the acceptance battery")->set_help_flag("--help", "print this help and exit");
    handlers["reproduce-paper"] = [&] { return detail::cmd_reproduce(out); };

    if (argc > 1 && argv[1][0] != '-' && !handlers.contains(argv[1])) {
        err << "error: unknown subcommand '" << argv[1] << "'\n\n" << app.help();
        return kExitInvalid;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitInvalid;
    }

    try {
        return handlers.at(app.get_subcommands().front()->get_name())();
    } catch (const ContractError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const nlohmann::json::exception& e) {
        err << "error: invalid input: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}

}  // namespace ruelle::cli
