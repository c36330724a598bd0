#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hids/rep_tree.hpp"
#include "test_util.hpp"

using namespace hids;

namespace {

double train_accuracy(const Tree& tree, const Dataset& data, std::span<const uint32_t> rows) {
    size_t hits = 0;
    for (uint32_t r : rows) {
        int32_t leaf = tree.route(data.row(r));
        if (tree.nodes[static_cast<size_t>(leaf)].predicted == data.view_label(r)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(rows.size());
}

size_t prune_errors(const Tree& tree, const Dataset& data, std::span<const uint32_t> rows) {
    size_t errs = 0;
    for (uint32_t r : rows) {
        int32_t leaf = tree.route(data.row(r));
        if (tree.nodes[static_cast<size_t>(leaf)].predicted != data.view_label(r)) ++errs;
    }
    return errs;
}

}  // namespace

TEST_CASE("entropy oracle values") {
    std::vector<uint64_t> c13{1, 3};
    CHECK(entropy(c13) == doctest::Approx(0.811278).epsilon(1e-6));
    std::vector<uint64_t> even{2, 2};
    CHECK(entropy(even) == doctest::Approx(1.0));
    std::vector<uint64_t> pure{0, 5};
    CHECK(entropy(pure) == doctest::Approx(0.0));
    std::vector<uint64_t> four{1, 1, 1, 1};
    CHECK(entropy(four) == doctest::Approx(2.0));
    std::vector<uint64_t> zero{0, 0};
    CHECK_THROWS_AS(entropy(zero), InputError);
}

TEST_CASE("best split lands on the boundary midpoint") {
    std::vector<double> values{1, 2, 3, 4};
    std::vector<int32_t> labels{0, 0, 1, 1};
    auto split = best_numeric_split(values, labels, 2);
    REQUIRE(split.has_value());
    CHECK(split->threshold == 2.5);
    CHECK(split->gain == doctest::Approx(1.0));
}

TEST_CASE("best split prefers the smallest threshold on ties") {
    std::vector<double> values{1, 2, 3};
    std::vector<int32_t> labels{0, 1, 0};
    auto split = best_numeric_split(values, labels, 2);
    REQUIRE(split.has_value());
    CHECK(split->threshold == 1.5);
}

TEST_CASE("best split respects min_leaf") {
    std::vector<double> values{1, 2, 3, 4};
    std::vector<int32_t> labels{0, 1, 1, 1};
    auto split = best_numeric_split(values, labels, 2, 2);
    REQUIRE(split.has_value());
    CHECK(split->threshold == 2.5);
    auto none = best_numeric_split(values, labels, 2, 3);
    CHECK(!none.has_value());
}

TEST_CASE("best split bails on constant input; pure labels yield zero gain") {
    std::vector<double> constant{2, 2, 2};
    std::vector<int32_t> mixed{0, 1, 0};
    CHECK(!best_numeric_split(constant, mixed, 2).has_value());
    // Pure labels still produce a candidate, but its gain is zero, so the
    // grower's merit threshold turns the node into a leaf.
    std::vector<double> values{1, 2, 3};
    std::vector<int32_t> pure{1, 1, 1};
    auto split = best_numeric_split(values, pure, 2);
    REQUIRE(split.has_value());
    CHECK(split->gain == 0.0);
    CHECK(split->threshold == 1.5);
}

TEST_CASE("unpruned growth fits consistent data perfectly") {
    for (uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
        Dataset data = test::random_consistent_dataset(seed, 150, 3, 4);
        auto rows = test::all_rows(data);
        GrowOptions opts;
        opts.min_leaf = 1;
        Tree tree = grow_tree(data, rows, opts);
        CHECK(train_accuracy(tree, data, rows) == 1.0);
    }
}

TEST_CASE("children always carry a higher index than their parent") {
    Dataset data = test::random_noise_dataset(17, 300, 4, 3);
    auto rows = test::all_rows(data);
    Tree tree = grow_tree(data, rows, {});
    for (size_t i = 0; i < tree.nodes.size(); ++i) {
        const TreeNode& node = tree.nodes[i];
        if (node.is_leaf()) continue;
        CHECK(node.left > static_cast<int32_t>(i));
        CHECK(node.right > static_cast<int32_t>(i));
    }
}

TEST_CASE("max_depth caps splitting") {
    Dataset data = test::random_noise_dataset(19, 200, 3, 2);
    auto rows = test::all_rows(data);
    GrowOptions opts;
    opts.max_depth = 1;
    Tree tree = grow_tree(data, rows, opts);
    CHECK(tree.nodes.size() <= 3);
    for (const auto& node : tree.nodes)
        if (!node.is_leaf()) {
            CHECK(tree.nodes[static_cast<size_t>(node.left)].is_leaf());
            CHECK(tree.nodes[static_cast<size_t>(node.right)].is_leaf());
        }
}

TEST_CASE("route sends values at the threshold left") {
    Dataset data = test::make_dataset(
        {"x"}, {{{0.0}, "a"}, {{0.0}, "a"}, {{1.0}, "b"}, {{1.0}, "b"}});
    Tree tree = grow_tree(data, test::all_rows(data), {});
    REQUIRE(tree.nodes.size() == 3);
    const TreeNode& root = tree.nodes[0];
    CHECK(root.threshold == 0.5);
    CHECK(tree.route(std::vector<double>{0.5}) == root.left);
    CHECK(tree.route(std::vector<double>{0.500001}) == root.right);
}

TEST_CASE("min_test_depth reports the shallowest test per feature") {
    Dataset data = test::random_consistent_dataset(23, 200, 3, 4);
    Tree tree = grow_tree(data, test::all_rows(data), {});
    auto depth = tree.min_test_depth(3);
    REQUIRE(!tree.nodes.empty());
    REQUIRE(!tree.nodes[0].is_leaf());
    CHECK(depth[static_cast<size_t>(tree.nodes[0].feature)] == 1);
    for (size_t f = 0; f < 3; ++f) {
        bool tested = false;
        for (const auto& node : tree.nodes)
            tested = tested || (!node.is_leaf() && node.feature == static_cast<int32_t>(f));
        CHECK((depth[f] > 0) == tested);
    }
}

TEST_CASE("reduced error pruning never hurts prune-set accuracy") {
    for (uint64_t seed = 1; seed <= 30; ++seed) {
        Dataset data = test::random_noise_dataset(seed * 7 + 1, 240, 3, 3);
        std::vector<uint32_t> grow_rows, prune_rows;
        for (uint32_t i = 0; i < data.size(); ++i)
            (i % 3 == 0 ? prune_rows : grow_rows).push_back(i);
        GrowOptions opts;
        opts.min_leaf = 1;
        Tree tree = grow_tree(data, grow_rows, opts);
        size_t before = prune_errors(tree, data, prune_rows);
        reduced_error_prune(tree, data, prune_rows);
        size_t after = prune_errors(tree, data, prune_rows);
        CHECK(after <= before);
    }
}

TEST_CASE("pruning ties collapse the subtree") {
    Dataset data = test::make_dataset(
        {"x"}, {{{0.1}, "a"}, {{0.9}, "b"}, {{0.1}, "b"}});
    std::vector<uint32_t> grow_rows{0, 1};
    Tree tree = grow_tree(data, grow_rows, GrowOptions{.min_leaf = 1});
    REQUIRE(tree.nodes.size() == 3);

    std::vector<uint32_t> prune_rows{2};
    Tree tied = tree;
    reduced_error_prune(tied, data, prune_rows);
    CHECK(tied.nodes.size() == 1);
    CHECK(tied.nodes[0].is_leaf());

    // A prune row the subtree classifies strictly better keeps the split.
    Dataset data2 = test::make_dataset(
        {"x"}, {{{0.1}, "a"}, {{0.9}, "b"}, {{0.9}, "b"}});
    Tree kept = grow_tree(data2, grow_rows, GrowOptions{.min_leaf = 1});
    reduced_error_prune(kept, data2, prune_rows);
    CHECK(kept.nodes.size() == 3);
}

TEST_CASE("pruning compacts unreachable nodes") {
    Dataset data = test::random_noise_dataset(41, 300, 3, 2);
    std::vector<uint32_t> grow_rows, prune_rows;
    for (uint32_t i = 0; i < data.size(); ++i)
        (i % 4 == 0 ? prune_rows : grow_rows).push_back(i);
    Tree tree = grow_tree(data, grow_rows, GrowOptions{.min_leaf = 1});
    reduced_error_prune(tree, data, prune_rows);
    CHECK(tree.nodes.size() == 2 * tree.leaf_count() - 1);
    for (size_t i = 0; i < tree.nodes.size(); ++i) {
        const TreeNode& node = tree.nodes[i];
        if (node.is_leaf()) continue;
        CHECK(node.left > static_cast<int32_t>(i));
        CHECK(node.right > static_cast<int32_t>(i));
        CHECK(node.right < static_cast<int32_t>(tree.nodes.size()));
    }
}

TEST_CASE("train_rep_tree splits grow and prune shares") {
    Dataset data = test::random_consistent_dataset(51, 300, 4, 3);
    RepTreeParams params;
    params.seed = 9;
    RepTreeModel model = train_rep_tree(data, params);
    CHECK(model.grow_size == 200);
    CHECK(model.prune_size == 100);
    CHECK(model.width == 4);
    CHECK(model.classes == data.view_vocab());

    params.prune_fraction = 0.0;
    RepTreeModel unpruned = train_rep_tree(data, params);
    CHECK(unpruned.grow_size == 300);
    CHECK(unpruned.prune_size == 0);
    CHECK(unpruned.tree.nodes.size() >= model.tree.nodes.size());
}

TEST_CASE("train_rep_tree is deterministic given the seed") {
    Dataset data = test::random_noise_dataset(61, 250, 3, 3);
    RepTreeParams params;
    params.seed = 4;
    RepTreeModel a = train_rep_tree(data, params);
    RepTreeModel b = train_rep_tree(data, params);
    std::ostringstream sa, sb;
    a.save(sa);
    b.save(sb);
    CHECK(sa.str() == sb.str());

    params.seed = 5;
    RepTreeModel c = train_rep_tree(data, params);
    std::ostringstream sc;
    c.save(sc);
    CHECK(sa.str() != sc.str());
}

TEST_CASE("rep tree save/load round-trips predictions") {
    Dataset data = test::random_consistent_dataset(71, 220, 3, 4);
    RepTreeParams params;
    params.seed = 13;
    RepTreeModel model = train_rep_tree(data, params);
    std::stringstream buf;
    model.save(buf);
    RepTreeModel loaded = RepTreeModel::load(buf);
    CHECK(loaded.classes == model.classes);
    CHECK(loaded.width == model.width);
    CHECK(loaded.grow_size == model.grow_size);
    SplitMix64 rng(99);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> x{rng.unit(), rng.unit(), rng.unit()};
        CHECK(loaded.predict(x) == model.predict(x));
    }
}

TEST_CASE("predict_dist returns the leaf distribution") {
    Dataset data = test::make_dataset(
        {"x"}, {{{0.1}, "a"}, {{0.2}, "a"}, {{0.3}, "b"}, {{0.9}, "b"}, {{0.8}, "b"}});
    RepTreeParams params;
    params.prune_fraction = 0.0;
    params.min_leaf = 2;
    RepTreeModel model = train_rep_tree(data, params);
    std::vector<double> dist;
    model.predict_dist(std::vector<double>{0.15}, dist);
    REQUIRE(dist.size() == 2);
    CHECK(dist[0] + dist[1] == doctest::Approx(1.0));
}

TEST_CASE("model guards bad inputs") {
    Dataset data = test::random_consistent_dataset(81, 100, 2, 2);
    RepTreeParams params;
    RepTreeModel model = train_rep_tree(data, params);
    CHECK_THROWS_AS(model.predict(std::vector<double>{1.0, 2.0, 3.0}), InputError);
    RepTreeParams bad;
    bad.prune_fraction = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    RepTreeParams bad2;
    bad2.min_leaf = 0;
    CHECK_THROWS_AS(bad2.validate(), ConfigError);
}

TEST_CASE("write_tree/read_tree round-trip") {
    Dataset data = test::random_noise_dataset(91, 150, 3, 3);
    Tree tree = grow_tree(data, test::all_rows(data), {});
    std::stringstream buf;
    write_tree(buf, tree);
    Tree rt = read_tree(buf, 3);
    REQUIRE(rt.nodes.size() == tree.nodes.size());
    SplitMix64 rng(5);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> x{rng.unit(), rng.unit(), rng.unit()};
        CHECK(rt.route(x) == tree.route(x));
    }
    CHECK(rt.nodes[0].counts == tree.nodes[0].counts);
}
