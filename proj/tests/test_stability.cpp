#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "campmon/stability.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace campmon;

namespace {

constexpr Timestamp kNow = 1420000000;  // any recent moment

CampaignRecord good_campaign() {
    CampaignRecord c;
    c.id = "c1";
    c.currency = "USD";
    c.status = CampaignStatus::Active;
    c.start = kNow - days(30);
    c.targeting = {TargetingCriterion::Demographic};
    c.channel = MediaChannel::Display;
    return c;
}

// Deterministic hourly series: daily sine plus small seeded noise, long
// enough for every stability window at kNow.
HourlySeries periodic_series(std::uint64_t seed, int len_hours = 24 * 20,
                             double noise = 0.02) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, noise);
    HourlySeries s;
    s.start_hour = hour_floor(kNow) - hours(len_hours);
    for (int i = 0; i < len_hours; ++i) {
        double phase = 2.0 * std::numbers::pi * ((s.start_hour / 3600 + i) % 24) / 24.0;
        s.values.push_back(100.0 * (1.0 + 0.4 * std::sin(phase)) + 100.0 * g(rng));
    }
    return s;
}

} // namespace

TEST_CASE("setup rules accept only configured, running campaigns") {
    PipelineConfig cfg;
    CampaignRecord c = good_campaign();
    CHECK(check_setup(c, kNow, cfg.min_duration_days));

    SUBCASE("foreign currency") {
        c.currency = "EUR";
        CHECK(!check_setup(c, kNow, cfg.min_duration_days));
    }
    SUBCASE("paused") {
        c.status = CampaignStatus::Paused;
        CHECK(!check_setup(c, kNow, cfg.min_duration_days));
    }
    SUBCASE("stopped") {
        c.status = CampaignStatus::Stopped;
        CHECK(!check_setup(c, kNow, cfg.min_duration_days));
    }
    SUBCASE("too young") {
        c.start = kNow - days(3);
        CHECK(!check_setup(c, kNow, cfg.min_duration_days));
    }
    SUBCASE("duration must exceed the minimum strictly") {
        c.start = kNow - days(cfg.min_duration_days);
        CHECK(!check_setup(c, kNow, cfg.min_duration_days));
        c.start -= 1;
        CHECK(check_setup(c, kNow, cfg.min_duration_days));
    }
    SUBCASE("already ended") {
        c.end = kNow - days(1);
        CHECK(!check_setup(c, kNow, cfg.min_duration_days));
    }
    SUBCASE("ends exactly now") {
        c.end = kNow;
        CHECK(!check_setup(c, kNow, cfg.min_duration_days));
    }
    SUBCASE("ends later") {
        c.end = kNow + hours(1);
        CHECK(check_setup(c, kNow, cfg.min_duration_days));
    }
}

TEST_CASE("window_vector extracts exactly l trailing hours") {
    HourlySeries s;
    s.start_hour = 0;
    for (int i = 0; i < 48; ++i) s.values.push_back(static_cast<double>(i));

    auto w = window_vector(s, hours(47), 24);
    REQUIRE(w);
    REQUIRE(w->size() == 24);
    CHECK(w->front() == 24.0);  // hours 24..47 inclusive
    CHECK(w->back() == 47.0);

    SUBCASE("gap inside the window disqualifies it") {
        s.values[30] = std::nullopt;
        CHECK(!window_vector(s, hours(47), 24));
        CHECK(window_vector(s, hours(29), 24));  // window before the gap is fine
    }
    SUBCASE("window reaching past the data is absent") {
        CHECK(!window_vector(s, hours(10), 24));
        CHECK(!window_vector(s, hours(48), 24));
    }
}

TEST_CASE("pearson correlation matches a long double oracle") {
    std::vector<double> a{1, 2, 3, 4};
    std::vector<double> b{1, 2, 3, 5};

    auto r = pearson_correlation(a, b);
    REQUIRE(r);
    // 6.5 / sqrt(5 * 8.75)
    CHECK(*r == doctest::Approx(0.9827076298239907).epsilon(1e-12));
    auto ref = oracle::pearson(a, b);
    CHECK(*r == doctest::Approx(static_cast<double>(*ref)).epsilon(1e-12));

    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    for (int round = 0; round < 200; ++round) {
        std::vector<double> x(24), y(24);
        for (int i = 0; i < 24; ++i) {
            x[i] = 50 + 10 * g(rng);
            y[i] = 0.8 * x[i] + 5 * g(rng);
        }
        auto got = pearson_correlation(x, y);
        auto want = oracle::pearson(x, y);
        REQUIRE(got);
        CHECK(*got == doctest::Approx(static_cast<double>(*want)).epsilon(1e-10));
    }
}

TEST_CASE("pearson correlation edge cases") {
    CHECK(pearson_correlation({1, 1, 1}, {1, 2, 3}) == std::nullopt);
    CHECK(pearson_correlation({1, 2, 3}, {4, 4, 4}) == std::nullopt);
    CHECK(*pearson_correlation({1, 2, 3}, {2, 4, 6}) == doctest::Approx(1.0));
    CHECK(*pearson_correlation({1, 2, 3}, {-2, -4, -6}) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(pearson_correlation({1, 2}, {1, 2, 3}), Error);
    CHECK_THROWS_AS(pearson_correlation({1}, {2}), Error);

    SUBCASE("invariant under positive affine maps") {
        std::vector<double> x{3, 1, 4, 1, 5, 9, 2, 6};
        std::vector<double> y{2, 7, 1, 8, 2, 8, 1, 8};
        auto base = pearson_correlation(x, y);
        std::vector<double> scaled;
        for (double v : y) scaled.push_back(3.5 * v + 11.0);
        CHECK(*pearson_correlation(x, scaled) == doctest::Approx(*base).epsilon(1e-12));
        std::vector<double> flipped;
        for (double v : y) flipped.push_back(-2.0 * v + 1.0);
        CHECK(*pearson_correlation(x, flipped) == doctest::Approx(-*base).epsilon(1e-12));
    }
}

TEST_CASE("is_stable accepts periodic behavior and rejects degenerate series") {
    PipelineConfig cfg;

    CHECK(is_stable(periodic_series(1), kNow, cfg));
    CHECK(is_stable(periodic_series(2), kNow, cfg));

    SUBCASE("white noise is unstable") {
        std::mt19937_64 rng(3);
        std::normal_distribution<double> g(100.0, 20.0);
        HourlySeries s;
        s.start_hour = hour_floor(kNow) - hours(24 * 20);
        for (int i = 0; i < 24 * 20; ++i) s.values.push_back(g(rng));
        CHECK(!is_stable(s, kNow, cfg));
    }
    SUBCASE("constant series is unstable") {
        HourlySeries s;
        s.start_hour = hour_floor(kNow) - hours(24 * 20);
        s.values.assign(24 * 20, 42.0);
        CHECK(!is_stable(s, kNow, cfg));
    }
    SUBCASE("a gap in either window disqualifies") {
        // w1 ends x hours before the hour floor of now.
        Timestamp w1_end = hour_floor(kNow) - hours(cfg.x);
        HourlySeries s = periodic_series(4);
        auto poke = [&s](Timestamp t) {
            s.values[static_cast<std::size_t>((t - s.start_hour) / 3600)] = std::nullopt;
        };
        SUBCASE("gap in w1") {
            poke(w1_end - hours(5));
            CHECK(!is_stable(s, kNow, cfg));
        }
        SUBCASE("gap in daily reference window") {
            poke(w1_end - days(1) - hours(5));
            CHECK(!is_stable(s, kNow, cfg));
        }
        SUBCASE("gap in weekly reference window") {
            poke(w1_end - days(7) - hours(5));
            CHECK(!is_stable(s, kNow, cfg));
        }
        SUBCASE("gap outside every window is harmless") {
            poke(w1_end - days(3));
            CHECK(is_stable(s, kNow, cfg));
        }
    }
    SUBCASE("series too short for the weekly lookback") {
        HourlySeries s = periodic_series(5, 24 * 7);  // weekly window falls off the start
        CHECK(!is_stable(s, kNow, cfg));
    }
    SUBCASE("every configured period must pass") {
        // Dampen only the one day-old window; the weekly comparison still
        // matches, so failure proves the daily one is checked too.
        HourlySeries s = periodic_series(6, 24 * 20, 0.0);
        Timestamp w2_end = hour_floor(kNow) - hours(cfg.x) - days(1);
        std::mt19937_64 rng(99);
        std::normal_distribution<double> g(0.0, 60.0);
        for (int i = 0; i < cfg.l; ++i) {
            auto idx = static_cast<std::size_t>((w2_end - hours(i) - s.start_hour) / 3600);
            s.values[idx] = *s.values[idx] + g(rng);
        }
        CHECK(!is_stable(s, kNow, cfg));
    }
}

TEST_CASE("stability threshold applies to every period") {
    // Identical windows give r == 1 > delta for any delta < 1; engineering
    // r to land exactly on delta is brittle, so check the comparison
    // through the config instead.
    PipelineConfig cfg;
    cfg.delta = 0.999999;
    CHECK(is_stable(periodic_series(7, 24 * 20, 0.0), kNow, cfg));
}

TEST_CASE("refresh_stable_set combines setup and behavior gates") {
    PipelineConfig cfg;
    std::vector<CampaignRecord> portfolio;
    std::map<std::string, HourlySeries> series;

    CampaignRecord ok = good_campaign();
    portfolio.push_back(ok);
    series[ok.id] = periodic_series(10);

    CampaignRecord wrong_currency = good_campaign();
    wrong_currency.id = "c2";
    wrong_currency.currency = "GBP";
    portfolio.push_back(wrong_currency);
    series["c2"] = periodic_series(11);

    CampaignRecord noisy = good_campaign();
    noisy.id = "c3";
    portfolio.push_back(noisy);
    {
        std::mt19937_64 rng(12);
        std::normal_distribution<double> g(100.0, 20.0);
        HourlySeries s;
        s.start_hour = hour_floor(kNow) - hours(24 * 20);
        for (int i = 0; i < 24 * 20; ++i) s.values.push_back(g(rng));
        series["c3"] = s;
    }

    CampaignRecord missing = good_campaign();
    missing.id = "c4";
    portfolio.push_back(missing);

    std::vector<std::string> warnings;
    StableSet stable = refresh_stable_set(portfolio, series, kNow, cfg, &warnings);

    CHECK(stable.campaign_ids == std::set<std::string>{"c1"});
    CHECK(stable.computed_at == kNow);
    CHECK(stable.config.hash() == cfg.hash());
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("c4") != std::string::npos);
}

TEST_CASE("stable set file round-trips") {
    testutil::TempDir dir("stable");
    StableSet s;
    s.campaign_ids = {"c001", "c007", "c topical"};
    s.computed_at = kNow;

    std::string path = dir.file("stable_set.txt");
    write_stable_set(path, s);
    CHECK(read_stable_set(path) == s.campaign_ids);

    std::string text = testutil::slurp(path);
    CHECK(text.find("# computed_at=" + std::to_string(kNow)) != std::string::npos);
    CHECK(text.find("# config=" + s.config.hash()) != std::string::npos);
}
