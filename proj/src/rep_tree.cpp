#include "hids/rep_tree.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "hids/common.hpp"

namespace hids {

namespace {

constexpr double kMinGain = 1e-12;

int32_t argmax_lowest(std::span<const uint64_t> counts) {
    int32_t best = 0;
    for (size_t c = 1; c < counts.size(); ++c)
        if (counts[c] > counts[static_cast<size_t>(best)]) best = static_cast<int32_t>(c);
    return best;
}

}  // namespace

double entropy(std::span<const uint64_t> counts) {
    uint64_t total = 0;
    for (uint64_t c : counts) total += c;
    if (total == 0) throw InputError("entropy: all counts zero");
    double h = 0.0;
    for (uint64_t c : counts) {
        if (c == 0) continue;
        double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h > 0.0 ? h : 0.0;
}

std::optional<BestSplit> best_numeric_split(std::span<const double> values,
                                            std::span<const int32_t> labels, size_t n_classes,
                                            size_t min_leaf) {
    const size_t n = values.size();
    if (n < 2 || labels.size() != n) return std::nullopt;

    std::vector<uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(),
              [&](uint32_t a, uint32_t b) { return values[a] < values[b]; });

    std::vector<uint64_t> total(n_classes, 0);
    for (int32_t lbl : labels) ++total[static_cast<size_t>(lbl)];
    double parent_h = entropy(total);

    std::vector<uint64_t> left(n_classes, 0);
    std::vector<uint64_t> right = total;
    std::optional<BestSplit> best;

    size_t i = 0;
    while (i < n) {
        double v = values[order[i]];
        size_t j = i;
        while (j < n && values[order[j]] == v) {
            size_t cls = static_cast<size_t>(labels[order[j]]);
            ++left[cls];
            --right[cls];
            ++j;
        }
        if (j == n) break;
        size_t left_n = j;
        size_t right_n = n - j;
        if (left_n >= min_leaf && right_n >= min_leaf) {
            double wl = static_cast<double>(left_n) / static_cast<double>(n);
            double wr = static_cast<double>(right_n) / static_cast<double>(n);
            double gain = parent_h - wl * entropy(left) - wr * entropy(right);
            if (!best || gain > best->gain) {
                double hi = values[order[j]];
                double t = std::midpoint(v, hi);
                if (t >= hi) t = v;
                best = BestSplit{t, gain};
            }
        }
        i = j;
    }
    return best;
}

int32_t Tree::route(std::span<const double> x) const {
    int32_t idx = 0;
    while (!nodes[static_cast<size_t>(idx)].is_leaf()) {
        const TreeNode& node = nodes[static_cast<size_t>(idx)];
        idx = x[static_cast<size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    }
    return idx;
}

size_t Tree::leaf_count() const {
    size_t n = 0;
    for (const auto& node : nodes)
        if (node.is_leaf()) ++n;
    return n;
}

std::vector<uint32_t> Tree::min_test_depth(size_t width) const {
    std::vector<uint32_t> depth(width, 0);
    std::vector<std::pair<int32_t, uint32_t>> stack;
    if (!nodes.empty()) stack.push_back({0, 1});
    while (!stack.empty()) {
        auto [idx, d] = stack.back();
        stack.pop_back();
        const TreeNode& node = nodes[static_cast<size_t>(idx)];
        if (node.is_leaf()) continue;
        size_t f = static_cast<size_t>(node.feature);
        if (depth[f] == 0 || d < depth[f]) depth[f] = d;
        stack.push_back({node.right, d + 1});
        stack.push_back({node.left, d + 1});
    }
    return depth;
}

void RepTreeParams::validate() const {
    if (min_leaf < 1) throw ConfigError("reptree: min_leaf must be >= 1");
    if (prune_fraction < 0.0 || prune_fraction >= 1.0)
        throw ConfigError("reptree: prune_fraction must be in [0, 1)");
}

Tree grow_tree(const Dataset& data, std::span<const uint32_t> rows, const GrowOptions& opts) {
    if (rows.empty()) throw InputError("grow_tree: empty grow set");
    if (!opts.feature_weights.empty() && opts.feature_weights.size() != data.width())
        throw InputError("grow_tree: feature weight vector width mismatch");
    const size_t n_classes = data.view_vocab().size();
    const size_t width = data.width();
    const size_t min_leaf = std::max<size_t>(1, opts.min_leaf);

    Tree tree;
    std::vector<uint32_t> work(rows.begin(), rows.end());

    struct Item {
        int32_t node;
        size_t lo, hi;
        size_t depth;
    };
    tree.nodes.emplace_back();
    std::vector<Item> stack{{0, 0, work.size(), 0}};

    std::vector<double> scratch_values;
    std::vector<int32_t> scratch_labels;
    std::vector<uint32_t> order;

    while (!stack.empty()) {
        Item item = stack.back();
        stack.pop_back();
        const size_t count = item.hi - item.lo;

        std::vector<uint64_t> counts(n_classes, 0);
        for (size_t k = item.lo; k < item.hi; ++k)
            ++counts[static_cast<size_t>(data.view_label(work[k]))];
        {
            TreeNode& node = tree.nodes[static_cast<size_t>(item.node)];
            node.predicted = argmax_lowest(counts);
            node.counts = counts;
        }

        size_t present = 0;
        for (uint64_t c : counts)
            if (c > 0) ++present;
        bool depth_capped = opts.max_depth > 0 && item.depth >= opts.max_depth;
        if (present <= 1 || count < 2 * min_leaf || depth_capped) continue;

        int32_t best_feature = -1;
        double best_threshold = 0.0;
        double best_merit = kMinGain;
        for (size_t f = 0; f < width; ++f) {
            scratch_values.clear();
            scratch_labels.clear();
            for (size_t k = item.lo; k < item.hi; ++k) {
                scratch_values.push_back(data.value(work[k], f));
                scratch_labels.push_back(data.view_label(work[k]));
            }
            auto split = best_numeric_split(scratch_values, scratch_labels, n_classes, min_leaf);
            if (!split) continue;
            double weight = opts.feature_weights.empty() ? 1.0 : opts.feature_weights[f];
            double merit = split->gain * weight;
            if (merit > best_merit) {
                best_merit = merit;
                best_feature = static_cast<int32_t>(f);
                best_threshold = split->threshold;
            }
        }
        if (best_feature < 0) continue;

        auto begin = work.begin() + static_cast<ptrdiff_t>(item.lo);
        auto end = work.begin() + static_cast<ptrdiff_t>(item.hi);
        auto mid_it = std::partition(begin, end, [&](uint32_t r) {
            return data.value(r, static_cast<size_t>(best_feature)) <= best_threshold;
        });
        size_t mid = item.lo + static_cast<size_t>(mid_it - begin);
        if (mid == item.lo || mid == item.hi)
            throw InternalError("grow_tree: split produced an empty child");

        int32_t left = static_cast<int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        int32_t right = static_cast<int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        {
            TreeNode& node = tree.nodes[static_cast<size_t>(item.node)];
            node.feature = best_feature;
            node.threshold = best_threshold;
            node.left = left;
            node.right = right;
        }
        stack.push_back({right, mid, item.hi, item.depth + 1});
        stack.push_back({left, item.lo, mid, item.depth + 1});
    }
    return tree;
}

namespace {

// Drops nodes unreachable from the root and renumbers children.
void compact(Tree& tree) {
    if (tree.nodes.empty()) return;
    std::vector<int32_t> remap(tree.nodes.size(), -1);
    std::vector<TreeNode> packed;
    std::vector<int32_t> stack{0};
    // First pass: assign new indices in DFS preorder (parent before child
    // keeps the parent-index-lower invariant).
    std::vector<int32_t> visit;
    while (!stack.empty()) {
        int32_t idx = stack.back();
        stack.pop_back();
        remap[static_cast<size_t>(idx)] = static_cast<int32_t>(visit.size());
        visit.push_back(idx);
        const TreeNode& node = tree.nodes[static_cast<size_t>(idx)];
        if (!node.is_leaf()) {
            stack.push_back(node.right);
            stack.push_back(node.left);
        }
    }
    packed.reserve(visit.size());
    for (int32_t idx : visit) {
        TreeNode node = std::move(tree.nodes[static_cast<size_t>(idx)]);
        if (!node.is_leaf()) {
            node.left = remap[static_cast<size_t>(node.left)];
            node.right = remap[static_cast<size_t>(node.right)];
        }
        packed.push_back(std::move(node));
    }
    tree.nodes = std::move(packed);
}

}  // namespace

void reduced_error_prune(Tree& tree, const Dataset& data, std::span<const uint32_t> prune_rows) {
    if (tree.empty() || prune_rows.empty()) return;
    const size_t n_nodes = tree.nodes.size();
    std::vector<uint32_t> work(prune_rows.begin(), prune_rows.end());
    std::vector<size_t> lo(n_nodes, 0), hi(n_nodes, 0);
    lo[0] = 0;
    hi[0] = work.size();
    // Children have higher indices than parents, so one ascending pass
    // routes every node's prune subset.
    for (size_t idx = 0; idx < n_nodes; ++idx) {
        const TreeNode& node = tree.nodes[idx];
        if (node.is_leaf()) continue;
        auto begin = work.begin() + static_cast<ptrdiff_t>(lo[idx]);
        auto end = work.begin() + static_cast<ptrdiff_t>(hi[idx]);
        auto mid_it = std::partition(begin, end, [&](uint32_t r) {
            return data.value(r, static_cast<size_t>(node.feature)) <= node.threshold;
        });
        size_t mid = lo[idx] + static_cast<size_t>(mid_it - begin);
        lo[static_cast<size_t>(node.left)] = lo[idx];
        hi[static_cast<size_t>(node.left)] = mid;
        lo[static_cast<size_t>(node.right)] = mid;
        hi[static_cast<size_t>(node.right)] = hi[idx];
    }
    // Bottom-up (descending index) error comparison.
    std::vector<uint64_t> subtree_err(n_nodes, 0);
    for (size_t r = n_nodes; r-- > 0;) {
        TreeNode& node = tree.nodes[r];
        uint64_t leaf_err = 0;
        for (size_t k = lo[r]; k < hi[r]; ++k)
            if (data.view_label(work[k]) != node.predicted) ++leaf_err;
        if (node.is_leaf()) {
            subtree_err[r] = leaf_err;
            continue;
        }
        uint64_t child_err = subtree_err[static_cast<size_t>(node.left)] +
                             subtree_err[static_cast<size_t>(node.right)];
        if (leaf_err <= child_err) {
            node.feature = -1;
            node.left = -1;
            node.right = -1;
            subtree_err[r] = leaf_err;
        } else {
            subtree_err[r] = child_err;
        }
    }
    compact(tree);
}

RepTreeModel train_rep_tree(const Dataset& data, const RepTreeParams& params) {
    params.validate();
    if (data.empty()) throw InputError("train: empty dataset");
    RepTreeModel model;
    model.classes = data.view_vocab();
    model.width = data.width();
    model.params = params;

    std::vector<uint32_t> rows(data.size());
    std::iota(rows.begin(), rows.end(), 0u);
    SplitMix64 rng(params.seed);
    rng.shuffle(rows);

    size_t n_prune = static_cast<size_t>(
        std::floor(static_cast<double>(rows.size()) * params.prune_fraction));
    size_t n_grow = rows.size() - n_prune;
    if (n_grow == 0) {
        n_grow = 1;
        n_prune = rows.size() - 1;
    }
    model.grow_size = n_grow;
    model.prune_size = n_prune;

    GrowOptions opts;
    opts.min_leaf = params.min_leaf;
    opts.max_depth = params.max_depth;
    std::span<const uint32_t> all(rows);
    model.tree = grow_tree(data, all.subspan(0, n_grow), opts);
    if (n_prune > 0) reduced_error_prune(model.tree, data, all.subspan(n_grow));
    return model;
}

int32_t RepTreeModel::predict(std::span<const double> x) const {
    if (x.size() != width) throw InputError("predict: record width mismatch");
    return tree.nodes[static_cast<size_t>(tree.route(x))].predicted;
}

int32_t RepTreeModel::predict_dist(std::span<const double> x, std::vector<double>& dist) const {
    if (x.size() != width) throw InputError("predict: record width mismatch");
    const TreeNode& leaf = tree.nodes[static_cast<size_t>(tree.route(x))];
    uint64_t total = 0;
    for (uint64_t c : leaf.counts) total += c;
    dist.assign(classes.size(), 0.0);
    if (total > 0)
        for (size_t c = 0; c < leaf.counts.size(); ++c)
            dist[c] = static_cast<double>(leaf.counts[c]) / static_cast<double>(total);
    return leaf.predicted;
}

void write_tree(std::ostream& out, const Tree& tree) {
    out << "nodes " << tree.nodes.size() << "\n";
    for (const auto& node : tree.nodes) {
        if (node.is_leaf()) {
            out << "leaf " << node.predicted;
        } else {
            out << "split " << node.feature << " " << format_double(node.threshold) << " "
                << node.left << " " << node.right << " " << node.predicted;
        }
        for (uint64_t c : node.counts) out << " " << c;
        out << "\n";
    }
}

Tree read_tree(std::istream& in, size_t n_classes) {
    std::string line;
    if (!std::getline(in, line)) throw InputError("tree: missing node count");
    std::istringstream head(line);
    std::string tag;
    size_t n = 0;
    head >> tag >> n;
    if (tag != "nodes" || head.fail()) throw InputError("tree: bad node count line '" + line + "'");
    Tree tree;
    tree.nodes.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        if (!std::getline(in, line)) throw InputError("tree: truncated node list");
        std::istringstream ls(line);
        std::string kind;
        ls >> kind;
        TreeNode node;
        if (kind == "split") {
            std::string threshold;
            ls >> node.feature >> threshold >> node.left >> node.right >> node.predicted;
            if (ls.fail()) throw InputError("tree: malformed split node '" + line + "'");
            node.threshold = parse_double(threshold);
        } else if (kind == "leaf") {
            ls >> node.predicted;
            if (ls.fail()) throw InputError("tree: malformed leaf node '" + line + "'");
        } else {
            throw InputError("tree: unknown node kind '" + kind + "'");
        }
        node.counts.resize(n_classes);
        for (size_t c = 0; c < n_classes; ++c) {
            if (!(ls >> node.counts[c])) throw InputError("tree: missing counts in '" + line + "'");
        }
        tree.nodes.push_back(std::move(node));
    }
    return tree;
}

void RepTreeModel::save(std::ostream& out) const {
    out << "reptree v1\n";
    out << "width " << width << "\n";
    out << "params min_leaf " << params.min_leaf << " max_depth " << params.max_depth
        << " prune_fraction " << format_double(params.prune_fraction) << " seed " << params.seed
        << "\n";
    out << "sets grow " << grow_size << " prune " << prune_size << "\n";
    out << "classes " << classes.size() << "\n";
    for (const auto& name : classes) out << name << "\n";
    write_tree(out, tree);
}

RepTreeModel RepTreeModel::load(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "reptree v1")
        throw InputError("reptree: unrecognized header '" + line + "'");
    RepTreeModel model;
    {
        if (!std::getline(in, line)) throw InputError("reptree: truncated");
        std::istringstream ls(line);
        std::string tag;
        ls >> tag >> model.width;
        if (tag != "width" || ls.fail()) throw InputError("reptree: bad width line");
    }
    {
        if (!std::getline(in, line)) throw InputError("reptree: truncated");
        std::istringstream ls(line);
        std::string tag, key, pf;
        ls >> tag;
        if (tag != "params") throw InputError("reptree: bad params line");
        ls >> key >> model.params.min_leaf >> key >> model.params.max_depth >> key >> pf >> key >>
            model.params.seed;
        if (ls.fail()) throw InputError("reptree: bad params line");
        model.params.prune_fraction = parse_double(pf);
    }
    {
        if (!std::getline(in, line)) throw InputError("reptree: truncated");
        std::istringstream ls(line);
        std::string tag, key;
        ls >> tag >> key >> model.grow_size >> key >> model.prune_size;
        if (tag != "sets" || ls.fail()) throw InputError("reptree: bad sets line");
    }
    size_t n_classes = 0;
    {
        if (!std::getline(in, line)) throw InputError("reptree: truncated");
        std::istringstream ls(line);
        std::string tag;
        ls >> tag >> n_classes;
        if (tag != "classes" || ls.fail()) throw InputError("reptree: bad classes line");
    }
    for (size_t c = 0; c < n_classes; ++c) {
        if (!std::getline(in, line)) throw InputError("reptree: truncated class list");
        model.classes.push_back(line);
    }
    model.tree = read_tree(in, n_classes);
    if (model.tree.empty()) throw InputError("reptree: empty tree");
    return model;
}

}  // namespace hids
