#include <doctest.h>

#include <random>

#include "campmon/aggregation.hpp"
#include "campmon/stability.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace campmon;

TEST_CASE("cluster keys name themselves consistently") {
    CHECK(ClusterKey::of(TargetingCriterion::Behavioral).to_string() == "targeting:behavioral");
    CHECK(ClusterKey::of(MediaChannel::Display).to_string() == "channel:display");
    CHECK(ClusterKey::of(MediaChannel::Display).file_stem() == "channel_display");

    CHECK(all_cluster_keys().size() == 10);
    for (const auto& key : all_cluster_keys())
        CHECK(ClusterKey::from_string(key.to_string()) == key);

    CHECK_THROWS_AS(ClusterKey::from_string("channel"), Error);
    CHECK_THROWS_AS(ClusterKey::from_string("channel:tv"), Error);
    CHECK_THROWS_AS(ClusterKey::from_string("audience:display"), Error);
}

TEST_CASE("clusters_of lists the channel and every targeting criterion") {
    CampaignRecord c;
    c.id = "c1";
    c.currency = "USD";
    c.start = 0;
    c.targeting = {TargetingCriterion::Device, TargetingCriterion::Dayparting};
    c.channel = MediaChannel::Mobile;

    auto keys = clusters_of(c);
    REQUIRE(keys.size() == 3);
    CHECK(std::count(keys.begin(), keys.end(), ClusterKey::of(MediaChannel::Mobile)) == 1);
    CHECK(std::count(keys.begin(), keys.end(), ClusterKey::of(TargetingCriterion::Device)) == 1);
    CHECK(std::count(keys.begin(), keys.end(), ClusterKey::of(TargetingCriterion::Dayparting)) == 1);
}

TEST_CASE("downsample sums samples into hour buckets") {
    RawSeries raw;
    raw.metric = "m";
    raw.points = {{0, 1.0}, {1800, 2.0}, {3599, 0.5}, {7200, 4.0}};

    HourlySeries s = downsample_hourly(raw);
    CHECK(s.start_hour == 0);
    REQUIRE(s.size() == 3);
    CHECK(*s.values[0] == doctest::Approx(3.5));
    CHECK(s.values[1] == std::nullopt);
    CHECK(*s.values[2] == doctest::Approx(4.0));

    SUBCASE("matches the map-replay oracle on random input") {
        std::mt19937_64 rng(17);
        std::uniform_int_distribution<Timestamp> ts(0, 86400 * 3);
        std::uniform_real_distribution<double> val(-5, 5);
        RawSeries r2;
        std::map<Timestamp, double> bucket;
        for (int i = 0; i < 500; ++i) r2.points.emplace_back(ts(rng), val(rng));
        std::sort(r2.points.begin(), r2.points.end());
        auto expected = oracle::downsample(r2.points);

        HourlySeries got = downsample_hourly(r2);
        for (const auto& [hour, sum] : expected)
            CHECK(*got.at_hour(hour) == doctest::Approx(sum).epsilon(1e-12));
        std::size_t present = 0;
        for (const auto& v : got.values) present += v.has_value();
        CHECK(present == expected.size());
    }
}

namespace {

CampaignRecord display_campaign(const std::string& id) {
    CampaignRecord c;
    c.id = id;
    c.currency = "USD";
    c.start = 0;
    c.targeting = {TargetingCriterion::Demographic};
    c.channel = MediaChannel::Display;
    return c;
}

HourlySeries fixed_series(Timestamp start_hour, std::vector<std::optional<double>> values) {
    HourlySeries s;
    s.start_hour = start_hour;
    s.values = std::move(values);
    return s;
}

} // namespace

TEST_CASE("aggregate_cluster sums stable members slot-wise") {
    std::vector<CampaignRecord> portfolio{display_campaign("a"), display_campaign("b"),
                                          display_campaign("c"), display_campaign("d")};
    portfolio[3].channel = MediaChannel::Video;  // different cluster

    std::map<std::string, HourlySeries> series;
    series["a"] = fixed_series(0, {1.0, 2.0, std::nullopt, 4.0});
    series["b"] = fixed_series(3600, {10.0, 20.0});  // offset start, shorter
    series["c"] = fixed_series(0, {100.0, 100.0});   // unstable, must be ignored
    series["d"] = fixed_series(0, {1000.0, 1000.0}); // stable but other channel

    StableSet stable;
    stable.campaign_ids = {"a", "b", "d"};

    std::vector<std::string> warnings;
    HourlySeries agg = aggregate_cluster(stable, ClusterKey::of(MediaChannel::Display),
                                         portfolio, series, &warnings);

    CHECK(agg.start_hour == 0);
    REQUIRE(agg.size() == 4);
    CHECK(*agg.values[0] == 1.0);          // only a present
    CHECK(*agg.values[1] == 2.0 + 10.0);   // both present
    CHECK(*agg.values[2] == 20.0);         // a gaps, contributes nothing
    CHECK(*agg.values[3] == 4.0);
    CHECK(warnings.empty());

    SUBCASE("slots where every member gaps are gaps") {
        series["a"].values[2] = std::nullopt;
        series["b"] = fixed_series(3600, {10.0});
        HourlySeries sparse = aggregate_cluster(stable, ClusterKey::of(MediaChannel::Display),
                                                portfolio, series, &warnings);
        REQUIRE(sparse.size() == 4);
        CHECK(sparse.values[2] == std::nullopt);
        CHECK(*sparse.values[3] == 4.0);
    }
    SUBCASE("empty membership warns and yields an empty series") {
        StableSet none;
        HourlySeries empty = aggregate_cluster(none, ClusterKey::of(MediaChannel::Display),
                                               portfolio, series, &warnings);
        CHECK(empty.empty());
        REQUIRE(warnings.size() == 1);
        CHECK(warnings[0].find("channel:display") != std::string::npos);
    }
}

TEST_CASE("aggregate_cluster matches an independent re-summation") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> val(0, 100);
    std::bernoulli_distribution gap(0.1);

    std::vector<CampaignRecord> portfolio;
    std::map<std::string, HourlySeries> series;
    StableSet stable;
    for (int i = 0; i < 8; ++i) {
        auto c = display_campaign("c" + std::to_string(i));
        portfolio.push_back(c);
        HourlySeries s;
        s.start_hour = hours(static_cast<int>(rng() % 5));
        for (int h = 0; h < 100; ++h) {
            if (gap(rng))
                s.values.push_back(std::nullopt);
            else
                s.values.push_back(val(rng));
        }
        s.trim_trailing_gaps();
        series[c.id] = s;
        if (i % 2 == 0) stable.campaign_ids.insert(c.id);
    }

    HourlySeries agg =
        aggregate_cluster(stable, ClusterKey::of(MediaChannel::Display), portfolio, series);

    // Re-sum by timestamp lookup over the stable members only.
    for (std::size_t i = 0; i < agg.size(); ++i) {
        Timestamp t = agg.hour_at(i);
        double sum = 0;
        bool any = false;
        for (const auto& id : stable.campaign_ids) {
            auto v = series[id].at_hour(t);
            if (v) {
                sum += *v;
                any = true;
            }
        }
        if (any)
            CHECK(*agg.values[i] == doctest::Approx(sum).epsilon(1e-12));
        else
            CHECK(agg.values[i] == std::nullopt);
    }
}

TEST_CASE("change metric is the value minus its seasonal ancestor") {
    HourlySeries m;
    m.start_hour = 0;
    for (int i = 0; i < 50; ++i) m.values.push_back(static_cast<double>(i * i));

    ChangeMetric cm = change_metric(m, 1, ClusterKey::of(MediaChannel::Display));
    CHECK(cm.p_days == 1);
    CHECK(cm.series.start_hour == days(1));
    REQUIRE(cm.series.size() == 50 - 24);
    for (std::size_t i = 0; i < cm.series.size(); ++i) {
        double expect = static_cast<double>((i + 24) * (i + 24)) - static_cast<double>(i * i);
        CHECK(*cm.series.values[i] == expect);
    }

    SUBCASE("gaps in either operand become gaps") {
        m.values[3] = std::nullopt;   // ancestor of slot 3
        m.values[40] = std::nullopt;  // the point itself
        ChangeMetric gappy = change_metric(m, 1, ClusterKey::of(MediaChannel::Display));
        CHECK(gappy.series.values[3] == std::nullopt);
        CHECK(gappy.series.values[40 - 24] == std::nullopt);
        CHECK(gappy.series.values[4] != std::nullopt);
    }
    SUBCASE("too-short series yields an empty metric and a warning") {
        HourlySeries shorty = m;
        shorty.values.resize(24);
        std::vector<std::string> warnings;
        ChangeMetric empty = change_metric(shorty, 1, ClusterKey::of(MediaChannel::Display),
                                           &warnings);
        CHECK(empty.series.empty());
        CHECK(warnings.size() == 1);
    }
    SUBCASE("invalid period throws") {
        CHECK_THROWS_AS(change_metric(m, 0, ClusterKey::of(MediaChannel::Display)), Error);
    }
}

TEST_CASE("change metric matches the timestamp-lookup oracle") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> val(0, 50);
    std::bernoulli_distribution gap(0.05);

    HourlySeries m;
    m.start_hour = hours(5);
    for (int i = 0; i < 24 * 30; ++i) {
        if (gap(rng))
            m.values.push_back(std::nullopt);
        else
            m.values.push_back(val(rng));
    }

    std::map<Timestamp, double> as_map;
    for (std::size_t i = 0; i < m.size(); ++i)
        if (m.values[i]) as_map[m.hour_at(i)] = *m.values[i];

    for (int p : {1, 7}) {
        ChangeMetric cm = change_metric(m, p, ClusterKey::of(MediaChannel::Display));
        auto expected = oracle::change_metric(as_map, p);
        std::size_t present = 0;
        for (std::size_t i = 0; i < cm.series.size(); ++i) {
            Timestamp t = cm.series.hour_at(i);
            auto it = expected.find(t);
            if (cm.series.values[i]) {
                ++present;
                REQUIRE(it != expected.end());
                CHECK(*cm.series.values[i] == doctest::Approx(it->second).epsilon(1e-12));
            } else {
                CHECK(it == expected.end());
            }
        }
        CHECK(present == expected.size());
    }
}

TEST_CASE("a dip in the metric echoes positively one period later") {
    HourlySeries m;
    m.start_hour = 0;
    m.values.assign(24 * 20, 100.0);
    const std::size_t dip = 24 * 10;
    m.values[dip] = 40.0;

    ChangeMetric cm = change_metric(m, 1, ClusterKey::of(MediaChannel::Display));
    auto at = [&cm](std::size_t metric_index) {
        return *cm.series.values[metric_index - 24];  // metric slot for m[i]
    };
    CHECK(at(dip) == -60.0);       // the outage itself
    CHECK(at(dip + 24) == 60.0);   // the differencing echo, positive
    CHECK(at(dip + 1) == 0.0);
    CHECK(at(dip + 23) == 0.0);
    CHECK(at(dip + 25) == 0.0);
}

TEST_CASE("hourly and change-metric csv formatting") {
    testutil::TempDir dir("aggcsv");

    HourlySeries s = fixed_series(3600, {1.5, std::nullopt, 3.0});
    write_hourly_csv(dir.file("h.csv"), s);
    CHECK(testutil::slurp(dir.file("h.csv")) == "hour,value\n3600,1.5\n7200,\n10800,3\n");

    ChangeMetric cm;
    cm.cluster = ClusterKey::of(MediaChannel::Display);
    cm.p_days = 7;
    cm.series = fixed_series(0, {-2.5});
    write_change_metric_csv(dir.file("cm.csv"), cm);
    std::string text = testutil::slurp(dir.file("cm.csv"));
    CHECK(text.find("# cluster=channel:display") != std::string::npos);
    CHECK(text.find("# p=7") != std::string::npos);
    CHECK(text.find("0,-2.5\n") != std::string::npos);
}
