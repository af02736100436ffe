// Command-line front end: attractors, inhomogeneous attractors, dimension
// estimates, OSC checks, fractal interpolation, rendering and the
// verification battery.
//
// Exit codes: 0 pass, 1 a check failed, 2 usage or input error,
// 3 capacity or numeric error.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fractal/fractal.hpp"

namespace {

using fractal::io::json;
namespace fs = std::filesystem;

enum Exit : int { kPass = 0, kFail = 1, kUsage = 2, kCompute = 3 };

struct Globals {
    double tol = 1e-4;
    std::uint64_t seed = 1;
    std::string out;
    std::string format = "csv";
};

std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(cell, &used));
            if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw fractal::ContractError("cannot parse '" + cell + "' in " + what);
        }
    }
    if (v.empty()) throw fractal::ContractError(what + " is empty");
    return v;
}

// Writes text to --out when given, else to stdout.
void emit(const Globals& g, const std::string& text) {
    if (g.out.empty()) {
        std::cout << text;
        return;
    }
    auto out = fractal::io::open_out(g.out);
    out << text;
}

std::string cloud_text(const Globals& g, const fractal::PointCloud& cloud, json meta) {
    if (g.format == "json") {
        json pts = json::array();
        for (std::size_t i = 0; i < cloud.size(); ++i) pts.push_back(cloud.point_vector(i));
        meta["dimension"] = cloud.dimension();
        meta["resolution"] = cloud.resolution();
        meta["points"] = std::move(pts);
        return meta.dump(2) + "\n";
    }
    std::ostringstream s;
    fractal::io::write_cloud_csv(s, cloud);
    return s.str();
}

fractal::Viewport parse_viewport(const std::string& text, const fractal::PointCloud& cloud,
                                 std::pair<std::size_t, std::size_t> axes) {
    if (text.empty()) {
        const auto box = cloud.bounding_box();
        fractal::Viewport v{box.lo[axes.first], box.hi[axes.first], box.lo[axes.second], box.hi[axes.second]};
        if (v.x_max <= v.x_min) v.x_max = v.x_min + 1.0;
        if (v.y_max <= v.y_min) v.y_max = v.y_min + 1.0;
        return v;
    }
    const auto v = parse_list(text, "--viewport");
    if (v.size() != 4) throw fractal::ContractError("--viewport needs xmin,xmax,ymin,ymax");
    return {v[0], v[1], v[2], v[3]};
}

struct RenderArgs {
    std::string path;
    std::size_t width = 512, height = 512;
    std::string viewport;
    std::string axes;
};

void add_render_flags(CLI::App* app, RenderArgs& r, bool required_path) {
    auto* opt = app->add_option(required_path ? "--image" : "--render", r.path, "P6 PPM output path");
    if (required_path) opt->required();
    app->add_option("--width", r.width, "image width in pixels")->check(CLI::Range(16, 1 << 15));
    app->add_option("--height", r.height, "image height in pixels")->check(CLI::Range(16, 1 << 15));
    app->add_option("--viewport", r.viewport, "xmin,xmax,ymin,ymax (default: bounding box)");
    app->add_option("--axes", r.axes, "coordinate pair shown for clouds of dimension > 2, e.g. 0,1");
}

std::uint64_t do_render(const fractal::PointCloud& cloud, const RenderArgs& r) {
    std::optional<std::pair<std::size_t, std::size_t>> axes;
    if (!r.axes.empty()) {
        const auto a = parse_list(r.axes, "--axes");
        if (a.size() != 2 || a[0] < 0 || a[1] < 0) throw fractal::ContractError("--axes needs two coordinate indices");
        axes = std::make_pair(static_cast<std::size_t>(a[0]), static_cast<std::size_t>(a[1]));
    }
    const auto view = parse_viewport(r.viewport, cloud, axes.value_or(std::make_pair(std::size_t{0}, std::size_t{1})));
    const auto img = fractal::render(cloud, view, r.width, r.height, axes);
    const std::string bytes = img.ppm();
    auto out = fractal::io::open_out(r.path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    return fractal::fnv1a64(bytes);
}

std::string hex(std::uint64_t h) {
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << h;
    return s.str();
}

// Splits a box given per coordinate into per-factor boxes.
std::vector<fractal::Box> split_box(const fractal::Box& box, const fractal::io::IfsDocument& doc) {
    std::vector<fractal::Box> out;
    std::size_t pos = 0;
    for (const auto& f : doc.factors) {
        fractal::Box b;
        for (std::size_t j = 0; j < f.dimension; ++j) {
            b.lo.push_back(box.lo[pos + j]);
            b.hi.push_back(box.hi[pos + j]);
        }
        pos += f.dimension;
        out.push_back(std::move(b));
    }
    return out;
}

fractal::Box parse_box(const std::string& text, std::size_t dim) {
    const auto v = parse_list(text, "--box");
    if (v.size() % 2 != 0) throw fractal::ContractError("--box needs lo,hi pairs");
    fractal::Box b;
    if (v.size() == 2) {
        b.lo.assign(dim, v[0]);
        b.hi.assign(dim, v[1]);
    } else {
        if (v.size() != 2 * dim) throw fractal::ContractError("--box needs one lo,hi pair or one per coordinate");
        for (std::size_t j = 0; j < dim; ++j) {
            b.lo.push_back(v[2 * j]);
            b.hi.push_back(v[2 * j + 1]);
        }
    }
    return b;
}

json osc_json(const fractal::OscReport& r) {
    json j{{"verdict", r.holds ? "holds for this candidate" : "no conclusion"},
           {"margin", r.margin},
           {"containment_slack", r.containment_slack}};
    if (r.witness) j["overlapping_pair"] = {r.witness->first, r.witness->second};
    if (r.escaping_map) j["escaping_map"] = *r.escaping_map;
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Attractors, dimensions and fractal interpolation for (product) iterated function systems"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--tol", g.tol, "Hausdorff or sup-norm tolerance")->check(CLI::PositiveNumber);
    app.add_option("--seed", g.seed, "random seed");
    app.add_option("--out", g.out, "output path (default: stdout)");
    app.add_option("--format", g.format, "output encoding")->check(CLI::IsMember({"csv", "json"}));

    // attractor
    auto* att = app.add_subcommand("attractor", "attractor of an IFS or product IFS");
    std::string att_ifs;
    bool att_snap = false, att_embedded = false;
    double att_snap_width = 0.0;
    std::size_t att_chaos = 0, att_burn = 100, att_cap = fractal::kDefaultPointCap;
    RenderArgs att_render;
    att->add_option("--ifs", att_ifs, "IFS definition (JSON)")->required()->check(CLI::ExistingFile);
    att->add_flag("--snap", att_snap, "snap-to-grid dedup during iteration");
    att->add_option("--snap-width", att_snap_width, "snap width (default: automatic)");
    att->add_option("--chaos", att_chaos, "use the chaos game with this many points");
    att->add_option("--burn-in", att_burn, "chaos game points discarded first");
    att->add_option("--point-cap", att_cap, "per-iteration point cap");
    att->add_flag("--embedded", att_embedded, "for products: embed the factor attractors instead of iterating directly");
    add_render_flags(att, att_render, false);

    // inhomogeneous
    auto* inh = app.add_subcommand("inhomogeneous", "attractor of an IFS with condensation");
    std::string inh_ifs;
    std::size_t inh_depth = 8;
    bool inh_check = false, inh_snap = false;
    RenderArgs inh_render;
    inh->add_option("--ifs", inh_ifs, "IFS definition with condensation (JSON)")->required()->check(CLI::ExistingFile);
    inh->add_option("--depth", inh_depth, "orbital set depth");
    inh->add_flag("--check-decomposition", inh_check, "compare F_C with the orbital set united with F_empty");
    inh->add_flag("--snap", inh_snap, "snap-to-grid dedup during iteration");
    add_render_flags(inh, inh_render, false);

    // dimension
    auto* dim = app.add_subcommand("dimension", "box-counting dimension estimate");
    std::string dim_cloud, dim_manifest;
    double rmin = 0.0, rmax = 0.0;
    std::size_t scales = 8;
    auto* cloud_opt = dim->add_option("--cloud", dim_cloud, "point cloud CSV")->check(CLI::ExistingFile);
    dim->add_option("--manifest", dim_manifest, "product set manifest (JSON), counted factorwise")
        ->check(CLI::ExistingFile)
        ->excludes(cloud_opt);
    dim->add_option("--rmin", rmin, "smallest box size");
    dim->add_option("--rmax", rmax, "largest box size");
    dim->add_option("--scales", scales, "number of box sizes");

    // moran
    auto* mor = app.add_subcommand("moran", "solve sum c_i^s = 1");
    std::string ratios;
    mor->add_option("--ratios", ratios, "comma-separated ratios in (0,1)")->required();

    // osc
    auto* osc = app.add_subcommand("osc", "open set condition check on an axis box");
    std::string osc_ifs, osc_box = "0,1";
    osc->add_option("--ifs", osc_ifs, "IFS or product IFS definition (JSON)")->required()->check(CLI::ExistingFile);
    osc->add_option("--box", osc_box, "lo,hi (replicated) or one lo,hi pair per coordinate");

    // fif
    auto* fif = app.add_subcommand("fif", "fractal interpolation function");
    std::string fif_data, fif_alpha;
    std::size_t fif_grid = 4096;
    fif->add_option("--data", fif_data, "knot CSV with columns x,y")->required()->check(CLI::ExistingFile);
    fif->add_option("--alpha", fif_alpha, "vertical scalings, one per interval")->required();
    fif->add_option("--grid", fif_grid, "grid intervals M");

    // pfif
    auto* pf = app.add_subcommand("pfif", "product fractal interpolation function");
    std::string pf_job;
    pf->add_option("--job", pf_job, "job JSON")->required()->check(CLI::ExistingFile);

    // render
    auto* ren = app.add_subcommand("render", "render a point cloud to a PPM image");
    std::string ren_cloud;
    RenderArgs ren_args;
    ren->add_option("--cloud", ren_cloud, "point cloud CSV")->required()->check(CLI::ExistingFile);
    add_render_flags(ren, ren_args, true);

    // verify
    auto* ver = app.add_subcommand("verify", "run the verification battery");
    std::string only;
    bool fault = false;
    ver->add_option("--only", only, "run a single suite")->check(CLI::IsMember(fractal::battery_suites()));
    ver->add_flag("--inject-fault", fault, "perturb one product map offset by 1e-2 (negative control)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kPass : kUsage;
    }

    try {
        if (*att) {
            const auto doc = fractal::io::read_ifs(att_ifs);
            fractal::IterationOptions it;
            it.snap = att_snap;
            it.snap_width = att_snap_width;
            it.point_cap = att_cap;
            json meta{{"label", doc.label}};
            std::optional<fractal::PointCloud> cloud;
            if (doc.is_product()) {
                const auto p = doc.product();
                if (att_embedded) {
                    std::vector<fractal::PointCloud> fs;
                    for (const auto& f : p.factors()) fs.push_back(fractal::attractor(f, g.tol, it));
                    cloud = fractal::embed(fractal::ProductSet(std::move(fs)));
                } else {
                    const auto run = fractal::product_attractor_direct(p, g.tol, it);
                    meta["iterations"] = run.iterations;
                    cloud = run.cloud;
                }
            } else if (att_chaos > 0) {
                cloud = fractal::chaos_game(doc.system(), att_chaos, att_burn, g.seed);
                meta["method"] = "chaos game";
            } else {
                const auto run = fractal::attractor_run(doc.system(), g.tol, it);
                meta["iterations"] = run.iterations;
                meta["measured_stop"] = run.measured_stop;
                cloud = run.cloud;
            }
            emit(g, cloud_text(g, *cloud, meta));
            if (!att_render.path.empty()) std::cerr << "image hash " << hex(do_render(*cloud, att_render)) << "\n";
            std::cerr << cloud->size() << " points, certified within " << cloud->resolution() << "\n";
            return kPass;
        }
        if (*inh) {
            const auto doc = fractal::io::read_ifs(inh_ifs);
            fractal::IterationOptions it;
            it.snap = inh_snap;
            if (doc.is_product()) {
                const auto p = doc.condensed_product();
                const auto run = fractal::product_inhomogeneous_direct(p, g.tol, it);
                emit(g, cloud_text(g, run.cloud, {{"label", doc.label}, {"iterations", run.iterations}}));
                if (!inh_render.path.empty()) std::cerr << "image hash " << hex(do_render(run.cloud, inh_render)) << "\n";
                if (inh_check) {
                    const auto r = fractal::verify_product_inhomogeneous(p, g.tol, it);
                    std::cerr << "product check: distance " << r.distance << " bound " << r.bound
                              << (r.ok ? " pass" : " FAIL") << "\n";
                    return r.ok ? kPass : kFail;
                }
                return kPass;
            }
            const auto sys = doc.condensed();
            const auto cloud = fractal::inhomogeneous_attractor(sys, g.tol, it);
            emit(g, cloud_text(g, cloud, {{"label", doc.label}}));
            if (!inh_render.path.empty()) std::cerr << "image hash " << hex(do_render(cloud, inh_render)) << "\n";
            if (inh_check) {
                const auto r = fractal::decomposition_check(sys, inh_depth, g.tol, it);
                std::cerr << "decomposition: distance " << r.distance << " bound " << r.bound << " (truncation "
                          << r.truncation_bound << ")" << (r.ok ? " pass" : " FAIL") << "\n";
                return r.ok ? kPass : kFail;
            }
            return kPass;
        }
        if (*dim) {
            fractal::DimensionEstimate est;
            if (!dim_manifest.empty()) {
                const auto set = fractal::io::read_product_set(dim_manifest);
                if (rmin <= 0.0 || rmax <= 0.0) throw fractal::ContractError("--manifest needs --rmin and --rmax");
                est = fractal::box_dimension_estimate(set, rmin, rmax, scales);
            } else if (!dim_cloud.empty()) {
                const auto cloud = fractal::io::read_cloud_csv(dim_cloud);
                if (rmin > 0.0 && rmax > 0.0) est = fractal::box_dimension_estimate(cloud, rmin, rmax, scales);
                else est = fractal::box_dimension_estimate(cloud, scales);
            } else {
                throw fractal::ContractError("dimension needs --cloud or --manifest");
            }
            emit(g, fractal::io::estimate_to_json(est).dump(2) + "\n");
            return kPass;
        }
        if (*mor) {
            const auto sol = fractal::moran_solve(parse_list(ratios, "--ratios"));
            std::ostringstream s;
            s << std::setprecision(17);
            if (g.format == "json") {
                s << json{{"s", sol.s}, {"ratios", sol.ratios}, {"residual", sol.residual}}.dump(2) << "\n";
            } else {
                s << "s,residual\n" << sol.s << "," << sol.residual << "\n";
            }
            emit(g, s.str());
            return kPass;
        }
        if (*osc) {
            const auto doc = fractal::io::read_ifs(osc_ifs);
            const auto box = parse_box(osc_box, doc.dimension);
            json out;
            bool holds = false;
            if (doc.is_product()) {
                const auto r = fractal::osc_check_product(doc.product(), split_box(box, doc));
                out["product"] = osc_json(r.product);
                out["factors"] = json::array();
                for (const auto& f : r.factors) out["factors"].push_back(osc_json(f));
                out["factor_conjunction"] = r.factors_hold;
                out["agrees"] = r.agrees;
                if (r.witness) out["lifted_witness"] = {r.witness->first, r.witness->second};
                holds = r.product.holds;
            } else {
                const auto r = fractal::osc_check_boxes(doc.system(), box);
                out = osc_json(r);
                holds = r.holds;
            }
            emit(g, out.dump(2) + "\n");
            return holds ? kPass : kFail;
        }
        if (*fif) {
            const auto data = fractal::io::read_knots_csv(fif_data);
            const auto maps = fractal::build_fif_maps(data, parse_list(fif_alpha, "--alpha"));
            const auto run = fractal::fif_fixed_point(maps, fif_grid, g.tol);
            std::ostringstream s;
            fractal::io::write_sampled_csv(s, run.g);
            emit(g, s.str());
            std::cerr << run.iterations << " iterations\n";
            return kPass;
        }
        if (*pf) {
            const auto job = fractal::io::read_json(pf_job);
            const fs::path base = fs::path(pf_job).parent_path();
            const std::size_t grid = job.value("grid", std::size_t{4096});
            const double tol = job.value("tol", g.tol);
            std::vector<fractal::FactorSpec> specs;
            for (const auto& f : job.at("factors")) {
                fractal::InterpolationData data;
                if (f.contains("data")) {
                    data = fractal::io::read_knots_csv(base / f.at("data").get<std::string>());
                } else {
                    const auto pts = f.at("knots").get<std::vector<std::vector<double>>>();
                    std::vector<double> xs, ys;
                    for (const auto& p : pts) {
                        if (p.size() != 2) throw fractal::IoError("knots must be [x, y] pairs");
                        xs.push_back(p[0]);
                        ys.push_back(p[1]);
                    }
                    data = fractal::InterpolationData(xs, ys);
                }
                specs.push_back({data, f.at("alpha").get<std::vector<double>>()});
            }
            const auto pfif = fractal::product_fif(specs, grid, tol);
            const auto residual = fractal::product_residual(pfif);
            // Output lattice: per-factor sample count, first factor slowest.
            const std::size_t per = job.value("output_points", std::size_t{33});
            if (per < 2) throw fractal::ContractError("output_points must be at least 2");
            const std::size_t m = pfif.factor_count();
            std::ostringstream s;
            s << std::setprecision(17);
            for (std::size_t k = 0; k < m; ++k) s << (k ? "," : "") << "x" << k + 1;
            for (std::size_t k = 0; k < m; ++k) s << ",g" << k + 1;
            s << "\n";
            std::vector<std::size_t> idx(m, 0);
            std::vector<double> x(m);
            while (true) {
                for (std::size_t k = 0; k < m; ++k) {
                    const auto& f = pfif.maps[k];
                    x[k] = f.x0() + (f.xN() - f.x0()) * static_cast<double>(idx[k]) / static_cast<double>(per - 1);
                }
                const auto y = pfif(x);
                for (std::size_t k = 0; k < m; ++k) s << (k ? "," : "") << x[k];
                for (std::size_t k = 0; k < m; ++k) s << "," << y[k];
                s << "\n";
                std::size_t j = m;
                bool done = true;
                while (j-- > 0) {
                    if (++idx[j] < per) {
                        done = false;
                        break;
                    }
                    idx[j] = 0;
                }
                if (done) break;
            }
            emit(g, s.str());
            std::cerr << "product operator residual " << residual.residual << "\n";
            return residual.residual <= tol ? kPass : kFail;
        }
        if (*ren) {
            const auto cloud = fractal::io::read_cloud_csv(ren_cloud);
            std::cout << hex(do_render(cloud, ren_args)) << "\n";
            return kPass;
        }
        if (*ver) {
            fractal::BatteryOptions opt;
            if (!only.empty()) opt.only = only;
            opt.inject_fault = fault;
            opt.seed = g.seed == 1 ? opt.seed : g.seed;
            const auto reports = fractal::verify_all(opt);
            bool failed = false;
            std::ostringstream s;
            if (g.format == "json") {
                json arr = json::array();
                for (const auto& r : reports) {
                    arr.push_back({{"suite", r.suite}, {"check", r.check}, {"anchor", r.anchor}, {"measured", r.measured},
                                   {"bound", r.bound}, {"status", fractal::to_string(r.status)}, {"detail", r.detail},
                                   {"seconds", r.seconds}});
                    failed = failed || r.status == fractal::Verdict::Fail;
                }
                s << arr.dump(2) << "\n";
            } else {
                s << "suite,check,status,measured,bound,seconds,anchor,detail\n";
                s << std::setprecision(6);
                for (const auto& r : reports) {
                    s << r.suite << ",\"" << r.check << "\"," << fractal::to_string(r.status) << "," << r.measured << ","
                      << r.bound << "," << r.seconds << ",\"" << r.anchor << "\",\"" << r.detail << "\"\n";
                    failed = failed || r.status == fractal::Verdict::Fail;
                }
            }
            emit(g, s.str());
            return failed ? kFail : kPass;
        }
    } catch (const fractal::CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return kCompute;
    } catch (const fractal::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kCompute;
    } catch (const fractal::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
