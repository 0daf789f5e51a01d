// cursal: command-line front end for the cursor-saliency toolkit.
//
// Exit codes: 0 ok, 1 runtime failure, 2 usage or parse error.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <pthread.h>

#include <CLI11.hpp>

#include "cursal/cursal.hpp"

namespace fs = std::filesystem;
using namespace cursal;

namespace {

constexpr int kOk = 0;
constexpr int kRuntimeFailure = 1;
constexpr int kUsageError = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string num(double v) { return io::format_fixed(v, 9); }

struct RasterOptions {
    std::string traces;
    std::string catalog;
    std::string video;
    int width = 0;
    int height = 0;
    double fps = 0.0;
    int n_frames = 0;
    std::string out;
    std::string source = "all";
    double sigma_frac = RasterParams{}.sigma_frac;
    double truncation = RasterParams{}.truncation_radius_sigmas;
    int window_k = 0;
    double decay = PostprocessParams{}.decay;
    std::string motion;
    std::string motion_frames;
    int block = 16;
    int search = 8;
};

RasterParams raster_params(double sigma_frac, double truncation) {
    RasterParams p;
    p.sigma_frac = sigma_frac;
    p.truncation_radius_sigmas = truncation;
    p.validate();
    return p;
}

int cmd_rasterize(const RasterOptions& o) {
    auto traces = io::load_traces(o.traces);
    if (o.source != "all") {
        Source want;
        if (!parse_source(o.source, want)) throw UsageError("--source must be mouse, eye or all");
        std::erase_if(traces, [&](const FixationTrace& t) { return t.source != want; });
    }

    std::set<std::string> videos;
    for (const auto& t : traces) videos.insert(t.video_id);
    std::string video_id = o.video;
    if (video_id.empty() && videos.size() == 1) video_id = *videos.begin();
    if (video_id.empty() && videos.size() > 1) throw UsageError("trace file covers several videos; pick one with --video");
    std::erase_if(traces, [&](const FixationTrace& t) { return t.video_id != video_id; });

    VideoMeta meta;
    if (!o.catalog.empty()) {
        const auto entries = io::load_catalog(o.catalog);
        const auto idx = io::video_index(entries);
        if (video_id.empty() && entries.size() == 1) video_id = entries.front().video_id;
        const auto it = idx.find(video_id);
        if (it == idx.end()) throw UsageError("video '" + video_id + "' is not in the catalog");
        meta = it->second;
    } else {
        if (o.width <= 0 || o.height <= 0 || o.fps <= 0.0 || o.n_frames <= 0) {
            throw UsageError("give --catalog or all of --width --height --fps --frames");
        }
        meta = {o.width, o.height, o.fps, o.n_frames};
    }

    std::size_t n_samples = 0;
    std::set<std::string> observers;
    for (const auto& t : traces) {
        n_samples += t.samples.size();
        observers.insert(t.observer_id);
    }
    if (n_samples == 0) std::cerr << "warning: no fixation samples; writing all-zero saliency\n";

    const RasterParams params = raster_params(o.sigma_frac, o.truncation);
    auto bins = bin_traces(traces, meta);
    if (o.window_k > 0) {
        MotionField motion;
        if (!o.motion.empty()) {
            motion = io::load_motion(o.motion);
        } else if (!o.motion_frames.empty()) {
            const auto frames = io::read_frames(o.motion_frames);
            motion = estimate_motion(frames, o.block, o.search);
        } else {
            throw UsageError("--window-k needs --motion or --motion-frames");
        }
        bins = propagate_fixations(bins, motion, o.window_k, o.decay);
    }
    const SaliencyVideo video = rasterize_bins(bins, meta, params, video_id);
    io::write_saliency(o.out, video);
    std::cout << "video " << (video_id.empty() ? "-" : video_id) << " observers " << observers.size() << " samples "
              << n_samples << " frames " << meta.n_frames << '\n';
    return kOk;
}

int cmd_evaluate(const std::string& pred_dir, const std::string& truth_dir, const std::string& out) {
    const SaliencyVideo pred = io::read_saliency(pred_dir);
    const SaliencyVideo truth = io::read_saliency(truth_dir);
    if (!pred.frames.empty() && !truth.frames.empty() && !pred.frames[0].same_shape(truth.frames[0])) {
        throw ShapeError("stores differ in frame size");
    }
    const VideoSimilarity r = video_similarity(pred, truth);

    std::ostringstream table;
    table << "frame sim\n";
    for (std::size_t i = 0; i < r.per_frame.size(); ++i) {
        table << i << ' ' << (std::isnan(r.per_frame[i]) ? std::string("skipped") : num(r.per_frame[i])) << '\n';
    }
    table << "# mean_sim " << num(r.mean) << '\n';
    table << "# skipped_frames " << r.skipped << '\n';
    if (out.empty()) {
        std::cout << table.str();
    } else {
        std::ofstream os(out);
        if (!os) throw IoError("cannot write " + out);
        os << table.str();
    }
    std::cerr << "mean SIM " << num(r.mean) << " over " << (r.per_frame.size() - r.skipped) << " frames ("
              << r.skipped << " skipped)\n";
    return kOk;
}

int cmd_curve(const std::string& mouse_path, const std::string& eye_path, const std::string& catalog,
              const std::vector<int>& n_values, int resamples, std::uint64_t seed, double sigma_frac,
              double truncation, const std::string& out) {
    const auto index = io::video_index(io::load_catalog(catalog));
    // Mouse observers are scored against the whole eye-tracking pool, so keep
    // their ids apart even when both files reuse the same participant ids.
    ObserverTraces mouse;
    for (auto& [id, traces] : io::by_observer(io::load_traces(mouse_path), Source::mouse)) {
        mouse.emplace("mouse:" + id, std::move(traces));
    }
    const auto eye = io::by_observer(io::load_traces(eye_path), Source::eye);
    const RasterParams params = raster_params(sigma_frac, truncation);

    for (int n : n_values) {
        if (n < 1) throw UsageError("N must be at least 1");
        if (static_cast<std::size_t>(n) > mouse.size()) {
            throw UsageError("N=" + std::to_string(n) + " exceeds the " + std::to_string(mouse.size()) +
                             " mouse observers");
        }
        if (static_cast<std::size_t>(n) >= eye.size()) {
            throw UsageError("N=" + std::to_string(n) + " leaves no eye-tracking holdout; limit is N <= " +
                             std::to_string(eye.size() == 0 ? 0 : eye.size() - 1));
        }
    }

    const auto mouse_curve = subsample_curve(mouse, eye, index, n_values, resamples, seed, params);
    const auto eye_curve = subsample_curve(eye, eye, index, n_values, resamples, seed, params);

    std::ostringstream table;
    table << "source N mean std resamples\n";
    for (const auto& p : mouse_curve) {
        table << "mouse " << p.n << ' ' << num(p.mean) << ' ' << num(p.stddev) << ' ' << p.resamples << '\n';
    }
    for (const auto& p : eye_curve) {
        table << "eye " << p.n << ' ' << num(p.mean) << ' ' << num(p.stddev) << ' ' << p.resamples << '\n';
    }
    if (out.empty()) {
        std::cout << table.str();
    } else {
        std::ofstream os(out);
        if (!os) throw IoError("cannot write " + out);
        os << table.str();
    }
    return kOk;
}

struct FitOptions {
    std::vector<std::string> inputs;
    std::vector<std::string> truths;
    std::string out;
    std::vector<double> gamma = ParamGrid{}.gamma;
    std::vector<double> alpha = ParamGrid{}.alpha;
    std::vector<double> beta = ParamGrid{}.beta;
    std::vector<double> center_sigma = ParamGrid{}.center_sigma_frac;
    int window_k = PostprocessParams{}.window_k;
    double decay = PostprocessParams{}.decay;
};

int cmd_fit_postprocess(const FitOptions& o) {
    if (o.inputs.empty()) throw UsageError("empty training set: give at least one --input/--truth pair");
    if (o.inputs.size() != o.truths.size()) throw UsageError("--input and --truth must be given in pairs");
    std::vector<SaliencyVideo> inputs, truths;
    for (std::size_t i = 0; i < o.inputs.size(); ++i) {
        inputs.push_back(io::read_saliency(o.inputs[i]));
        truths.push_back(io::read_saliency(o.truths[i]));
    }
    ParamGrid grid;
    grid.gamma = o.gamma;
    grid.alpha = o.alpha;
    grid.beta = o.beta;
    grid.center_sigma_frac = o.center_sigma;
    PostprocessParams base;
    base.window_k = o.window_k;
    base.decay = o.decay;
    const FitResult fit = fit_postprocess(inputs, truths, grid, base);
    io::save_params(o.out, fit.params, &fit.sim);
    std::cout << "training_sim " << num(fit.sim) << " evaluated " << fit.evaluated << '\n';
    return kOk;
}

int cmd_apply_postprocess(const std::string& params_path, const std::string& input, const std::string& out) {
    const PostprocessParams p = io::load_params(params_path);
    io::write_saliency(out, apply_postprocess(io::read_saliency(input), p));
    return kOk;
}

int cmd_render_foveated(const std::string& frames_dir, const std::string& trace_path, const std::string& observer,
                        const FoveationParams& fov, const std::string& out, int bit_depth,
                        const std::string& cursor_out) {
    io::StoreManifest m;
    const auto frames = io::read_frames(frames_dir, &m);
    auto traces = io::load_traces(trace_path);
    if (!m.video_id.empty()) {
        std::erase_if(traces, [&](const FixationTrace& t) { return t.video_id != m.video_id; });
    }
    if (!observer.empty()) {
        std::erase_if(traces, [&](const FixationTrace& t) { return t.observer_id != observer; });
    }
    if (traces.empty()) throw Error("missing_trace", "no trace for this video" + (observer.empty() ? "" : " and observer " + observer));
    if (traces.size() > 1) throw UsageError("several traces match; pick one with --observer");

    const auto rendered = render_foveated_video(frames, traces.front(), m.fps, fov);
    io::write_frames(out, rendered, m.fps, bit_depth, m.video_id);
    if (!cursor_out.empty()) {
        std::ofstream os(cursor_out);
        if (!os) throw IoError("cannot write " + cursor_out);
        os << "frame x_px y_px\n";
        const auto track = cursor_track(traces.front(), static_cast<int>(frames.size()), m.fps);
        for (std::size_t k = 0; k < track.size(); ++k) {
            os << k << ' ' << num(track[k].x * m.width) << ' ' << num(track[k].y * m.height) << '\n';
        }
    }
    return kOk;
}

int cmd_estimate_motion(const std::string& frames_dir, const std::string& out, int block, int search) {
    const auto frames = io::read_frames(frames_dir);
    io::save_motion(out, estimate_motion(frames, block, search));
    return kOk;
}

int cmd_export(const std::string& config_path, const std::string& out, bool include_excluded) {
    const auto cfg = service::load_config(config_path);
    service::CollectionService svc(cfg, io::load_catalog(cfg.resolved_catalog()));
    const auto d = svc.export_dataset(include_excluded);
    fs::create_directories(out);
    std::ofstream(fs::path(out) / "traces.txt") << d.trace_text();
    std::ofstream(fs::path(out) / "manifest.json") << d.manifest.dump(2) << '\n';
    std::cout << "exported " << d.traces.size() << " traces\n";
    return kOk;
}

int cmd_serve(const std::string& config_path) {
    service::ServiceConfig cfg;
    std::vector<io::VideoCatalogEntry> catalog;
    try {
        cfg = service::load_config(config_path);
        if (!fs::is_directory(cfg.asset_dir)) throw IoError("asset directory '" + cfg.asset_dir + "' does not exist");
        catalog = io::load_catalog(cfg.resolved_catalog());
        if (catalog.empty()) throw service::ServiceStateError("catalog " + cfg.resolved_catalog() + " lists no videos");
    } catch (const Error& e) {
        std::cerr << "cursal serve: startup failed: " << e.what() << '\n';
        return kRuntimeFailure;
    }

    // Signals are consumed by a dedicated thread via sigwait, so block them
    // before any server thread exists.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGTERM);
    sigaddset(&signals, SIGINT);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    std::unique_ptr<service::WebhookNotifier> webhook;
    if (!cfg.webhook_url.empty()) webhook = std::make_unique<service::WebhookNotifier>(cfg.webhook_url);
    service::CollectionService svc(cfg, catalog, [&](const service::SessionRecord& s) {
        if (webhook) webhook->notify(s);
    });
    service::HttpApi api(svc);
    const int port = api.bind();
    if (port < 0) {
        std::cerr << "cursal serve: cannot bind " << cfg.host << ':' << cfg.port << '\n';
        return kRuntimeFailure;
    }

    std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        std::cerr << "cursal serve: signal " << sig << ", shutting down\n";
        api.stop();
    });
    std::cout << "listening on " << cfg.host << ':' << port << std::endl;
    const bool ok = api.listen_after_bind();
    if (!ok) {
        // listen_after_bind only fails before a stop request; wake the waiter.
        pthread_kill(waiter.native_handle(), SIGTERM);
    }
    waiter.join();
    svc.flush();
    return kOk;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double v;
        if (!io::detail::parse_number(std::string_view(item), v)) throw UsageError("bad number '" + item + "' in list");
        out.push_back(v);
    }
    if (out.empty()) throw UsageError("empty list");
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cursal: cursor-based video saliency toolkit"};
    app.require_subcommand(1);

    RasterOptions ro;
    auto* rasterize = app.add_subcommand("rasterize", "Turn fixation traces into a saliency frame store");
    rasterize->add_option("--traces", ro.traces, "Trace file")->required();
    rasterize->add_option("--catalog", ro.catalog, "Video catalog JSON supplying geometry");
    rasterize->add_option("--video", ro.video, "Video id to rasterize");
    rasterize->add_option("--width", ro.width, "Frame width (without --catalog)");
    rasterize->add_option("--height", ro.height, "Frame height (without --catalog)");
    rasterize->add_option("--fps", ro.fps, "Frame rate (without --catalog)");
    rasterize->add_option("--frames", ro.n_frames, "Frame count (without --catalog)");
    rasterize->add_option("--out", ro.out, "Output saliency store")->required();
    rasterize->add_option("--source", ro.source, "mouse, eye or all")->capture_default_str();
    rasterize->add_option("--sigma-frac", ro.sigma_frac, "Fixation kernel sigma / width")->capture_default_str();
    rasterize->add_option("--truncation", ro.truncation, "Kernel truncation radius in sigmas")->capture_default_str();
    rasterize->add_option("--window-k", ro.window_k, "Propagate fixations this many frames each way")->capture_default_str();
    rasterize->add_option("--decay", ro.decay, "Weight factor per propagated frame")->capture_default_str();
    rasterize->add_option("--motion", ro.motion, "Motion field file for propagation");
    rasterize->add_option("--motion-frames", ro.motion_frames, "Frame store to estimate motion from");
    rasterize->add_option("--block", ro.block, "Block size for motion estimation")->capture_default_str();
    rasterize->add_option("--search", ro.search, "Search radius for motion estimation")->capture_default_str();

    std::string pred_dir, truth_dir, eval_out;
    auto* evaluate = app.add_subcommand("evaluate", "Similarity of a predicted saliency store against ground truth");
    evaluate->add_option("--pred", pred_dir, "Predicted saliency store")->required();
    evaluate->add_option("--truth", truth_dir, "Ground-truth saliency store")->required();
    evaluate->add_option("--out", eval_out, "Write the table here instead of stdout");

    std::string mouse_path, eye_path, curve_catalog, curve_out, n_list = "1,2,4,8";
    int resamples = 20;
    std::uint64_t seed = 1;
    double curve_sigma = RasterParams{}.sigma_frac, curve_trunc = RasterParams{}.truncation_radius_sigmas;
    auto* curve = app.add_subcommand("curve", "Mouse and eye-tracking quality versus observer count");
    curve->add_option("--mouse", mouse_path, "Mouse-tracking trace file")->required();
    curve->add_option("--eye", eye_path, "Eye-tracking trace file")->required();
    curve->add_option("--catalog", curve_catalog, "Video catalog JSON")->required();
    curve->add_option("--n", n_list, "Comma-separated observer counts")->capture_default_str();
    curve->add_option("--resamples", resamples, "Random subsets per N")->capture_default_str();
    curve->add_option("--seed", seed, "Random seed")->capture_default_str();
    curve->add_option("--sigma-frac", curve_sigma, "Fixation kernel sigma / width")->capture_default_str();
    curve->add_option("--truncation", curve_trunc, "Kernel truncation radius in sigmas")->capture_default_str();
    curve->add_option("--out", curve_out, "Write the table here instead of stdout");

    FitOptions fo;
    std::string g_list, a_list, b_list, c_list;
    auto* fit = app.add_subcommand("fit-postprocess", "Grid-search semiautomatic postprocessing parameters");
    fit->add_option("--input", fo.inputs, "Input saliency store (repeatable)");
    fit->add_option("--truth", fo.truths, "Ground-truth store paired with each --input (repeatable)");
    fit->add_option("--out", fo.out, "Parameter file to write")->required();
    fit->add_option("--gamma", g_list, "Comma-separated gamma grid");
    fit->add_option("--alpha", a_list, "Comma-separated alpha grid");
    fit->add_option("--beta", b_list, "Comma-separated beta grid");
    fit->add_option("--center-sigma", c_list, "Comma-separated center prior sigma grid");
    fit->add_option("--window-k", fo.window_k, "Propagation window recorded in the parameter file")->capture_default_str();
    fit->add_option("--decay", fo.decay, "Propagation decay recorded in the parameter file")->capture_default_str();

    std::string params_path, apply_in, apply_out;
    auto* apply = app.add_subcommand("apply-postprocess", "Apply fitted postprocessing to a saliency store");
    apply->add_option("--params", params_path, "Parameter file")->required();
    apply->add_option("--input", apply_in, "Input saliency store")->required();
    apply->add_option("--out", apply_out, "Output saliency store")->required();

    std::string rf_frames, rf_traces, rf_observer, rf_out, rf_cursor;
    FoveationParams fov;
    int bit_depth = 16;
    auto* render = app.add_subcommand("render-foveated", "Offline mouse-contingent rendering of a frame store");
    render->add_option("--frames", rf_frames, "Input frame store")->required();
    render->add_option("--traces", rf_traces, "Trace file")->required();
    render->add_option("--observer", rf_observer, "Observer whose trace drives the cursor");
    render->add_option("--sigma1-frac", fov.sigma1_frac, "Blur sigma / width")->capture_default_str();
    render->add_option("--sigmaw-frac", fov.sigmaw_frac, "Blend sigma / width")->capture_default_str();
    render->add_option("--bit-depth", bit_depth, "Output bit depth (8 or 16)")->capture_default_str();
    render->add_option("--out", rf_out, "Output frame store")->required();
    render->add_option("--cursor-out", rf_cursor, "Write per-frame cursor pixel positions here");

    std::string em_frames, em_out;
    int em_block = 16, em_search = 8;
    auto* motion = app.add_subcommand("estimate-motion", "Block-matching motion field of a frame store");
    motion->add_option("--frames", em_frames, "Input frame store")->required();
    motion->add_option("--out", em_out, "Motion field file")->required();
    motion->add_option("--block", em_block, "Block size")->capture_default_str();
    motion->add_option("--search", em_search, "Search radius")->capture_default_str();

    std::string config_path, export_out;
    bool include_excluded = false;
    auto* serve = app.add_subcommand("serve", "Run the collection service");
    serve->add_option("--config", config_path, "Service config JSON (CURSAL_* environment overrides it)");
    auto* exp = app.add_subcommand("export", "Export stored traces from a service data directory");
    exp->add_option("--config", config_path, "Service config JSON");
    exp->add_option("--out", export_out, "Output directory")->required();
    exp->add_flag("--include-excluded", include_excluded, "Also export excluded sessions");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsageError;
    }

    try {
        if (*rasterize) return cmd_rasterize(ro);
        if (*evaluate) return cmd_evaluate(pred_dir, truth_dir, eval_out);
        if (*curve) {
            std::vector<int> ns;
            for (double v : parse_list(n_list)) ns.push_back(static_cast<int>(v));
            return cmd_curve(mouse_path, eye_path, curve_catalog, ns, resamples, seed, curve_sigma, curve_trunc, curve_out);
        }
        if (*fit) {
            if (!g_list.empty()) fo.gamma = parse_list(g_list);
            if (!a_list.empty()) fo.alpha = parse_list(a_list);
            if (!b_list.empty()) fo.beta = parse_list(b_list);
            if (!c_list.empty()) fo.center_sigma = parse_list(c_list);
            return cmd_fit_postprocess(fo);
        }
        if (*apply) return cmd_apply_postprocess(params_path, apply_in, apply_out);
        if (*render) return cmd_render_foveated(rf_frames, rf_traces, rf_observer, fov, rf_out, bit_depth, rf_cursor);
        if (*motion) return cmd_estimate_motion(em_frames, em_out, em_block, em_search);
        if (*serve) return cmd_serve(config_path);
        if (*exp) return cmd_export(config_path, export_out, include_excluded);
    } catch (const UsageError& e) {
        std::cerr << "cursal: " << e.what() << '\n';
        return kUsageError;
    } catch (const ParseError& e) {
        std::cerr << "cursal: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        std::cerr << "cursal: " << e.what() << '\n';
        return kRuntimeFailure;
    }
    return kUsageError;
}
