#include <gtest/gtest.h>

#include "support.hpp"

using namespace cursal;
using namespace cursal::testing;

// ---- trace files ----------------------------------------------------------

TEST(TraceFormat, RoundTripAtSixDecimals) {
    Rng rng(1);
    std::vector<FixationTrace> traces;
    for (const char* obs : {"a", "b"}) {
        FixationTrace t{obs, "clip", Source::mouse, {}};
        for (int i = 0; i < 50; ++i) t.samples.push_back({obs, "clip", 20 * i, rng.uniform(), rng.uniform(), Source::mouse});
        traces.push_back(t);
    }
    std::ostringstream os;
    io::write_traces(os, traces);
    const auto back = io::parse_traces(os.str());
    ASSERT_EQ(back.size(), traces.size());
    for (std::size_t i = 0; i < traces.size(); ++i) {
        EXPECT_EQ(back[i].observer_id, traces[i].observer_id);
        ASSERT_EQ(back[i].samples.size(), traces[i].samples.size());
        for (std::size_t k = 0; k < traces[i].samples.size(); ++k) {
            EXPECT_EQ(back[i].samples[k].t_ms, traces[i].samples[k].t_ms);
            EXPECT_NEAR(back[i].samples[k].x, traces[i].samples[k].x, 5e-7);
            EXPECT_NEAR(back[i].samples[k].y, traces[i].samples[k].y, 5e-7);
        }
    }
    // A second cycle is exact.
    std::ostringstream again;
    io::write_traces(again, back);
    EXPECT_EQ(again.str(), os.str());
}

TEST(TraceFormat, GroupsByVideoObserverSource) {
    const auto t = io::parse_traces(
        "# comment\n"
        "v1 p1 mouse 0 0.1 0.2\n"
        "v1 p1 eye 0 0.3 0.4\n"
        "\n"
        "v2 p1 mouse 10 0.5 0.5\n"
        "v1 p1 mouse 40 0.2 0.2\n");
    ASSERT_EQ(t.size(), 3u);
    EXPECT_EQ(t[0].samples.size(), 2u);
    EXPECT_EQ(t[1].source, Source::eye);
    EXPECT_EQ(t[2].video_id, "v2");
}

TEST(TraceFormat, ErrorsNameTheLine) {
    const std::string good = "v p mouse 0 0.5 0.5\n";
    auto line_of = [](const std::string& text) {
        try {
            io::parse_traces(text);
        } catch (const ParseError& e) {
            EXPECT_NE(std::string(e.what()).find("line " + std::to_string(e.line())), std::string::npos);
            return static_cast<long>(e.line());
        }
        return -1L;
    };
    EXPECT_EQ(line_of(good + "v p mouse 1 0.5\n"), 2);
    EXPECT_EQ(line_of(good + good + "v p joystick 1 0.5 0.5\n"), 3);
    EXPECT_EQ(line_of("v p mouse -1 0.5 0.5\n"), 1);
    EXPECT_EQ(line_of("v p mouse 1.5 0.5 0.5\n"), 1);
    EXPECT_EQ(line_of("v p mouse 1 abc 0.5\n"), 1);
    EXPECT_EQ(line_of("v p mouse 1 1.2 0.5\n"), 1);
    EXPECT_EQ(line_of("v p mouse 10 0.5 0.5\nv p mouse 5 0.5 0.5\n"), 2);
    EXPECT_EQ(line_of(good), -1);
}

TEST(TraceFormat, ByObserver) {
    const auto t = io::parse_traces("v1 a eye 0 0.1 0.1\nv2 a eye 0 0.1 0.1\nv1 b mouse 0 0.1 0.1\n");
    const auto eye = io::by_observer(t, Source::eye);
    ASSERT_EQ(eye.size(), 1u);
    EXPECT_EQ(eye.at("a").size(), 2u);
}

// ---- frame stores ---------------------------------------------------------

TEST(FrameStore, EightAndSixteenBitRoundTrip) {
    TempDir dir;
    Rng rng(3);
    for (int depth : {8, 16}) {
        for (int ch : {1, 3}) {
            const std::vector<Frame> frames{random_frame(13, 7, ch, rng), random_frame(13, 7, ch, rng)};
            const auto sub = dir.path() / ("d" + std::to_string(depth) + "c" + std::to_string(ch));
            io::write_frames(sub, frames, 30.0, depth, "clip");
            io::StoreManifest m;
            const auto back = io::read_frames(sub, &m);
            EXPECT_EQ(m.kind, "frames");
            EXPECT_EQ(m.n_frames, 2);
            EXPECT_EQ(m.fps, 30.0);
            EXPECT_EQ(m.video_id, "clip");
            ASSERT_EQ(back.size(), 2u);
            const double tol = 0.5 / ((1 << depth) - 1) + 1e-12;
            for (std::size_t k = 0; k < 2; ++k) {
                ASSERT_TRUE(back[k].same_shape(frames[k]));
                for (std::size_t i = 0; i < frames[k].data.size(); ++i) {
                    EXPECT_NEAR(back[k].data[i], frames[k].data[i], tol);
                }
            }
        }
    }
}

TEST(FrameStore, SaliencyQuantizationWithinBound) {
    TempDir dir;
    Rng rng(4);
    SaliencyVideo v;
    v.video_id = "clip";
    v.fps = 25.0;
    for (int k = 0; k < 3; ++k) {
        SaliencyFrame f(10, 6);
        for (double& x : f.data) x = 0.003 * rng.uniform();
        v.frames.push_back(f);
    }
    io::write_saliency(dir.path(), v);
    io::StoreManifest m;
    const auto back = io::read_saliency(dir.path(), &m);
    EXPECT_EQ(m.kind, "saliency");
    EXPECT_EQ(m.bit_depth, 16);
    const double vmax = io::video_max(v);
    EXPECT_EQ(m.max_value, vmax);
    for (int k = 0; k < 3; ++k) {
        for (std::size_t i = 0; i < v.frames[k].data.size(); ++i) {
            EXPECT_LE(std::abs(back.frames[k].data[i] - v.frames[k].data[i]) / vmax, std::ldexp(1.0, -15));
        }
    }
    EXPECT_EQ(back, io::quantize_saliency(v));
    // The peak survives exactly.
    double bmax = 0;
    for (const auto& f : back.frames)
        for (double x : f.data) bmax = std::max(bmax, x);
    EXPECT_EQ(bmax, vmax);
}

TEST(FrameStore, AllZeroSaliency) {
    TempDir dir;
    SaliencyVideo v;
    v.frames = {SaliencyFrame(4, 3), SaliencyFrame(4, 3)};
    io::write_saliency(dir.path(), v);
    const auto back = io::read_saliency(dir.path());
    ASSERT_EQ(back.frames.size(), 2u);
    for (const auto& f : back.frames) EXPECT_FALSE(has_mass(f));
}

TEST(FrameStore, MissingOrCorruptStore) {
    TempDir dir;
    EXPECT_THROW(io::read_frames(dir.path() / "nope"), IoError);
    io::write_frames(dir.path(), std::vector<Frame>{Frame(4, 4, 1, 0.5)}, 25.0, 8);
    write_file(io::frame_path(dir.path(), 0, 1), "P5\n4 4\n255\nxx");
    EXPECT_ANY_THROW(io::read_frames(dir.path()));
}

// ---- motion files ---------------------------------------------------------

TEST(MotionFile, RoundTrip) {
    MotionField m;
    m.frame_width = 40;
    m.frame_height = 20;
    m.block_size = 16;
    Rng rng(5);
    m.vectors.resize(3);
    for (auto& f : m.vectors) {
        f.resize(m.grid_width() * m.grid_height());
        for (auto& v : f) v = {std::round(16 * rng.uniform()) - 8, 0.5 * std::round(8 * rng.uniform())};
    }
    std::stringstream ss;
    io::write_motion(ss, m);
    const std::string bytes = ss.str();
    EXPECT_EQ(bytes.substr(0, 4), "CSMF");
    EXPECT_EQ(bytes.size(), 4u + 7 * 4 + 3 * (3 * 2) * 2 * 4);
    EXPECT_EQ(io::read_motion(ss), m);
}

TEST(MotionFile, RejectsGarbage) {
    std::stringstream bad("NOPE0000000000000000");
    EXPECT_ANY_THROW(io::read_motion(bad));
    MotionField m;
    m.frame_width = m.frame_height = 16;
    m.vectors.assign(2, std::vector<MotionVector>(1));
    std::stringstream ss;
    io::write_motion(ss, m);
    std::stringstream cut(ss.str().substr(0, ss.str().size() - 3));
    EXPECT_ANY_THROW(io::read_motion(cut));
}

// ---- parameter files ------------------------------------------------------

TEST(ParamsFile, RoundTrip) {
    PostprocessParams p;
    p.window_k = 3;
    p.decay = 0.5;
    p.gamma = 0.75;
    p.alpha = 0.25;
    p.beta = 0.5;
    p.center_sigma_frac = 0.15;
    std::stringstream ss;
    const double sim = 0.8125;
    io::write_params(ss, p, &sim);
    EXPECT_NE(ss.str().find("# training_sim 0.812500"), std::string::npos);
    EXPECT_EQ(io::parse_params(ss), p);
}

TEST(ParamsFile, RejectsUnknownKeysAndBadValues) {
    std::stringstream a("gamma 1\nfoo 2\n");
    EXPECT_THROW(io::parse_params(a), ParseError);
    std::stringstream b("gamma x\n");
    EXPECT_THROW(io::parse_params(b), ParseError);
    std::stringstream c("alpha 0\nbeta 0\n");
    EXPECT_THROW(io::parse_params(c), ParseError);
}

// ---- catalog --------------------------------------------------------------

TEST(Catalog, RoundTripAndValidation) {
    TempDir dir;
    std::vector<io::VideoCatalogEntry> entries{catalog_entry("a"), catalog_entry("b", 1280, 720, 30.0, 600)};
    entries[1].view_count = 4;
    io::save_catalog(dir.str("catalog.json"), entries);
    EXPECT_EQ(io::load_catalog(dir.str("catalog.json")), entries);
    const auto idx = io::video_index(entries);
    EXPECT_EQ(idx.at("b").width, 1280);

    auto bad = catalog_entry("c");
    bad.duration_ms += 100;
    EXPECT_THROW(io::validate(bad), ParameterError);
    bad = catalog_entry("c");
    bad.duration_ms += 30;
    EXPECT_NO_THROW(io::validate(bad));
}
