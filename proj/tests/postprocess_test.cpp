#include <gtest/gtest.h>

#include "support.hpp"

using namespace cursal;
using namespace cursal::testing;

// ---- motion ---------------------------------------------------------------

TEST(Motion, StaticVideoHasZeroField) {
    const std::vector<Frame> frames{texture_frame(64, 48, 0), texture_frame(64, 48, 0), texture_frame(64, 48, 0)};
    const auto m = estimate_motion(frames, 16, 8);
    EXPECT_EQ(m.grid_width(), 4);
    EXPECT_EQ(m.grid_height(), 3);
    for (const auto& f : m.vectors)
        for (const auto& v : f) EXPECT_EQ(v, (MotionVector{0, 0}));
}

TEST(Motion, RightShiftOfThreePixels) {
    const std::vector<Frame> frames{texture_frame(96, 64, 0), texture_frame(96, 64, 3)};
    const auto m = estimate_motion(frames, 16, 8);
    int interior = 0;
    for (int by = 0; by < m.grid_height(); ++by) {
        for (int bx = 0; bx < m.grid_width(); ++bx) {
            // Interior: the true source block lies inside the previous frame.
            if (bx * 16 - 3 < 0 || bx * 16 + 16 - 3 > 96) continue;
            ++interior;
            EXPECT_EQ(m.vectors[1][by * m.grid_width() + bx], (MotionVector{3, 0})) << bx << "," << by;
        }
    }
    EXPECT_GT(interior, 0);
    for (const auto& v : m.vectors[0]) EXPECT_EQ(v, (MotionVector{0, 0}));
}

TEST(Motion, DiagonalShift) {
    const std::vector<Frame> frames{texture_frame(64, 64, 0), texture_frame(64, 64, -2, 5)};
    const auto m = estimate_motion(frames, 16, 8);
    EXPECT_EQ(m.vectors[1][1 * 4 + 1], (MotionVector{-2, 5}));
    EXPECT_EQ(m.vectors[1][1 * 4 + 2], (MotionVector{-2, 5}));
}

TEST(Motion, ZeroRadiusGivesZeroField) {
    const std::vector<Frame> frames{texture_frame(48, 32, 0), texture_frame(48, 32, 3)};
    const auto m = estimate_motion(frames, 16, 0);
    for (const auto& f : m.vectors)
        for (const auto& v : f) EXPECT_EQ(v, (MotionVector{0, 0}));
}

TEST(Motion, RaggedGridCoversFrame) {
    const std::vector<Frame> frames{texture_frame(50, 20, 0), texture_frame(50, 20, 1)};
    const auto m = estimate_motion(frames, 16, 2);
    EXPECT_EQ(m.grid_width(), 4);
    EXPECT_EQ(m.grid_height(), 2);
    EXPECT_NO_THROW(validate(m));
}

TEST(Motion, Errors) {
    const std::vector<Frame> one{texture_frame(32, 32, 0)};
    EXPECT_THROW(estimate_motion(one, 16, 8), ParameterError);
    const std::vector<Frame> two{texture_frame(32, 32, 0), texture_frame(32, 16, 0)};
    EXPECT_THROW(estimate_motion(two, 16, 8), ShapeError);
    const std::vector<Frame> ok{texture_frame(32, 32, 0), texture_frame(32, 32, 0)};
    EXPECT_THROW(estimate_motion(ok, 2, 8), ParameterError);
    EXPECT_THROW(estimate_motion(ok, 16, -1), ParameterError);
}

// ---- propagation ----------------------------------------------------------

namespace {

MotionField static_field(int w, int h, int n) {
    MotionField m;
    m.frame_width = w;
    m.frame_height = h;
    m.block_size = 16;
    m.vectors.assign(n, std::vector<MotionVector>(m.grid_width() * m.grid_height()));
    return m;
}

MotionField uniform_field(int w, int h, int n, MotionVector v) {
    MotionField m = static_field(w, h, n);
    for (int t = 1; t < n; ++t)
        for (auto& cell : m.vectors[t]) cell = v;
    return m;
}

double total_weight(const std::vector<WeightedPoint>& pts) {
    double s = 0.0;
    for (const auto& p : pts) s += p.weight;
    return s;
}

} // namespace

TEST(Propagate, ZeroWindowIsIdentity) {
    const std::vector<std::vector<WeightedPoint>> in{{{0.1, 0.2, 1}}, {}, {{0.5, 0.5, 1}, {0.7, 0.1, 1}}};
    EXPECT_EQ(propagate_fixations(in, static_field(64, 32, 3), 0, 0.5), in);
}

TEST(Propagate, StaticHandTrace) {
    const std::vector<std::vector<WeightedPoint>> in{{}, {{0.25, 0.75, 1}}, {}};
    const auto out = propagate_fixations(in, static_field(64, 32, 3), 1, 0.5);
    const std::vector<WeightedPoint> neighbour{{0.25, 0.75, 0.5}};
    EXPECT_EQ(out[0], neighbour);
    EXPECT_EQ(out[2], neighbour);
    EXPECT_EQ(out[1], in[1]);
}

TEST(Propagate, DecayOneCountsWindow) {
    const int n = 7, k = 2;
    std::vector<std::vector<WeightedPoint>> in(n);
    Rng rng(3);
    for (int t = 0; t < n; ++t)
        for (int i = 0; i < 1 + t % 3; ++i) in[t].push_back({rng.uniform(), rng.uniform(), 1});
    const auto out = propagate_fixations(in, static_field(64, 32, n), k, 1.0);
    for (int t = 0; t < n; ++t) {
        double want = 0;
        for (int s = std::max(0, t - k); s <= std::min(n - 1, t + k); ++s) want += in[s].size();
        EXPECT_DOUBLE_EQ(total_weight(out[t]), want);
    }
}

TEST(Propagate, WeightPerSourceFixation) {
    // One fixation in the middle of a long video contributes
    // sum_{|j|<=k} decay^|j| in total over all frames.
    const int n = 9, k = 3;
    const double decay = 0.7;
    std::vector<std::vector<WeightedPoint>> in(n);
    in[4].push_back({0.5, 0.5, 1});
    const auto out = propagate_fixations(in, static_field(64, 32, n), k, decay);
    double total = 0, want = 1;
    for (const auto& f : out) total += total_weight(f);
    for (int j = 1; j <= k; ++j) want += 2 * std::pow(decay, j);
    EXPECT_NEAR(total, want, 1e-12);
}

TEST(Propagate, FollowsTranslation) {
    // Content moves +4 px per frame in x. A fixation at frame 2 appears 4 px
    // further right at frame 3 and 4 px to the left at frame 1.
    const int w = 64, h = 32;
    std::vector<std::vector<WeightedPoint>> in(5);
    in[2].push_back({0.5, 0.5, 1});
    const auto out = propagate_fixations(in, uniform_field(w, h, 5, {4, 0}), 2, 0.8);
    ASSERT_EQ(out[3].size(), 1u);
    ASSERT_EQ(out[1].size(), 1u);
    EXPECT_NEAR(out[3][0].x, 0.5 + 4.0 / w, 1e-12);
    EXPECT_NEAR(out[1][0].x, 0.5 - 4.0 / w, 1e-12);
    EXPECT_NEAR(out[4][0].x, 0.5 + 8.0 / w, 1e-12);
    EXPECT_NEAR(out[0][0].x, 0.5 - 8.0 / w, 1e-12);
    EXPECT_EQ(out[3][0].y, 0.5);
    EXPECT_NEAR(out[4][0].weight, 0.64, 1e-12);
}

TEST(Propagate, OrderIsOwnThenPastThenFuture) {
    std::vector<std::vector<WeightedPoint>> in(3);
    in[0].push_back({0.1, 0.1, 1});
    in[1].push_back({0.2, 0.2, 1});
    in[2].push_back({0.3, 0.3, 1});
    const auto out = propagate_fixations(in, static_field(32, 32, 3), 1, 0.5);
    ASSERT_EQ(out[1].size(), 3u);
    EXPECT_EQ(out[1][0].x, 0.2);
    EXPECT_EQ(out[1][1].x, 0.1);
    EXPECT_EQ(out[1][2].x, 0.3);
}

TEST(Propagate, Errors) {
    const std::vector<std::vector<WeightedPoint>> in(3);
    EXPECT_THROW(propagate_fixations(in, static_field(32, 32, 2), 1, 0.5), ShapeError);
    EXPECT_THROW(propagate_fixations(in, static_field(32, 32, 3), -1, 0.5), ParameterError);
    EXPECT_THROW(propagate_fixations(in, static_field(32, 32, 3), 1, 0.0), ParameterError);
    EXPECT_THROW(propagate_fixations(in, static_field(32, 32, 3), 1, 1.5), ParameterError);
}

// ---- postprocess transform ------------------------------------------------

namespace {

SaliencyVideo random_video(int w, int h, int n, Rng& rng, const std::string& id = "v") {
    SaliencyVideo v;
    v.video_id = id;
    for (int k = 0; k < n; ++k) {
        std::vector<WeightedPoint> pts;
        for (int i = 0; i < 3; ++i) pts.push_back({rng.uniform(), rng.uniform(), 1});
        v.frames.push_back(rasterize_points(pts, w, h, {}));
    }
    return v;
}

} // namespace

TEST(Postprocess, IdentityIsPeakNormalized) {
    Rng rng(1);
    const auto in = random_video(24, 16, 3, rng);
    const auto out = apply_postprocess(in, {});
    for (std::size_t k = 0; k < in.frames.size(); ++k) {
        EXPECT_NEAR(*std::max_element(out.frames[k].data.begin(), out.frames[k].data.end()), 1.0, 1e-15);
        EXPECT_NEAR(similarity_score(out.frames[k], in.frames[k]), 1.0, 1e-12);
    }
}

TEST(Postprocess, PriorOnly) {
    Rng rng(2);
    const auto in = random_video(24, 16, 2, rng);
    PostprocessParams p;
    p.alpha = 0;
    p.beta = 1;
    const auto out = apply_postprocess(in, p);
    const auto cp = center_prior(24, 16, p.center_sigma_frac);
    for (const auto& f : out.frames) EXPECT_EQ(f, cp);
}

TEST(Postprocess, GammaWorkedExample) {
    SaliencyVideo v;
    SaliencyFrame f(2, 1);
    f.data = {0.5, 1.0};
    v.frames = {f};
    PostprocessParams p;
    p.gamma = 2;
    const auto out = apply_postprocess(v, p);
    EXPECT_NEAR(out.frames[0].data[0], 0.25, 1e-15);
    EXPECT_NEAR(out.frames[0].data[1], 1.0, 1e-15);
}

TEST(Postprocess, OutputBoundedByAlphaPlusBeta) {
    Rng rng(3);
    const auto in = random_video(20, 12, 4, rng);
    for (double a : {0.25, 1.0})
        for (double b : {0.0, 0.5, 1.0})
            for (double g : {0.5, 2.0}) {
                PostprocessParams p;
                p.alpha = a;
                p.beta = b;
                p.gamma = g;
                for (const auto& f : apply_postprocess(in, p).frames)
                    for (double v : f.data) {
                        EXPECT_GE(v, 0.0);
                        EXPECT_LE(v, a + b + 1e-12);
                    }
            }
}

TEST(Postprocess, CenterPriorPeaksAtCenter) {
    const auto cp = center_prior(31, 17, 0.25);
    EXPECT_DOUBLE_EQ(cp.at(15, 8), 1.0);
    EXPECT_NEAR(cp.at(0, 8), cp.at(30, 8), 1e-15);
}

TEST(Postprocess, InvalidParams) {
    PostprocessParams p;
    p.alpha = 0;
    p.beta = 0;
    EXPECT_THROW(p.validate(), ParameterError);
    p = {};
    p.gamma = 0;
    EXPECT_THROW(p.validate(), ParameterError);
    p = {};
    p.alpha = 1.5;
    EXPECT_THROW(p.validate(), ParameterError);
}

TEST(Fit, EmptyTrainingSetThrows) {
    EXPECT_THROW(fit_postprocess({}, {}), ParameterError);
}

TEST(Fit, TruthEqualsInputGivesOne) {
    Rng rng(4);
    std::vector<SaliencyVideo> in{random_video(20, 12, 3, rng), random_video(20, 12, 3, rng)};
    const auto fit = fit_postprocess(in, in);
    EXPECT_NEAR(fit.sim, 1.0, 1e-12);
}

TEST(Fit, RecoversForwardModel) {
    Rng rng(5);
    std::vector<SaliencyVideo> in{random_video(32, 18, 3, rng), random_video(32, 18, 3, rng)};
    PostprocessParams star;
    star.gamma = 1.5;
    star.alpha = 0.75;
    star.beta = 0.25;
    star.center_sigma_frac = 0.35;
    std::vector<SaliencyVideo> truth;
    for (const auto& v : in) truth.push_back(apply_postprocess(v, star));
    const auto fit = fit_postprocess(in, truth);
    EXPECT_GE(fit.sim, 0.999);
    EXPECT_NEAR(fit.sim, postprocess_score(in, truth, fit.params), 1e-12);
    // beta = 0 rows try one prior width only.
    EXPECT_EQ(fit.evaluated, 5 * (4 + 5 * 4 * 3));
}

TEST(Fit, NeverBelowIdentity) {
    Rng rng(6);
    for (int trial = 0; trial < 4; ++trial) {
        std::vector<SaliencyVideo> in{random_video(20, 12, 2, rng)}, truth{random_video(20, 12, 2, rng)};
        const auto fit = fit_postprocess(in, truth);
        EXPECT_GE(fit.sim, postprocess_score(in, truth, PostprocessParams{}));
    }
}

TEST(Fit, PropagationSettingsCarryThrough) {
    Rng rng(7);
    std::vector<SaliencyVideo> in{random_video(16, 9, 2, rng)};
    PostprocessParams base;
    base.window_k = 4;
    base.decay = 0.6;
    ParamGrid grid;
    grid.gamma = {1.0};
    const auto fit = fit_postprocess(in, in, grid, base);
    EXPECT_EQ(fit.params.window_k, 4);
    EXPECT_EQ(fit.params.decay, 0.6);
}

TEST(Fit, ImprovesSingleObserverMapsOnHeldOutVideos) {
    // Ground truth from many observers; inputs from one observer. Fit on some
    // videos, score on others.
    VideoIndex videos;
    for (int i = 0; i < 6; ++i) videos["v" + std::to_string(i)] = {48, 27, 25.0, 6};
    GazeProcess gaze;
    const auto eye = synth_observers("e", 20, Source::eye, videos, gaze, 31);
    const auto mouse = synth_observers("m", 1, Source::mouse, videos, gaze, 32);

    std::vector<SaliencyVideo> in_train, gt_train, in_test, gt_test;
    int i = 0;
    for (const auto& [vid, meta] : videos) {
        const auto gt = rasterize_video(detail::pooled_traces(eye, [&] {
            std::vector<std::string> ids;
            for (const auto& [id, _] : eye) ids.push_back(id);
            return ids;
        }(), vid), meta, {});
        const auto pred = rasterize_video(detail::pooled_traces(mouse, {"m00"}, vid), meta, {});
        (i++ < 3 ? in_train : in_test).push_back(pred);
        (i <= 3 ? gt_train : gt_test).push_back(gt);
    }
    const auto fit = fit_postprocess(in_train, gt_train);
    const double before = postprocess_score(in_test, gt_test, PostprocessParams{});
    const double after = postprocess_score(in_test, gt_test, fit.params);
    EXPECT_GT(after, before);
}
