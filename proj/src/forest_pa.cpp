#include "hids/forest_pa.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "hids/common.hpp"

namespace hids {

AttributeWeights AttributeWeights::uniform(size_t width) {
    AttributeWeights w;
    w.weights.assign(width, 1.0);
    w.last_tested_depth.assign(width, 0);
    return w;
}

void PaTreeParams::validate() const {
    if (tree_count < 1) throw ConfigError("forest: tree_count must be >= 1");
    if (min_leaf < 1) throw ConfigError("forest: min_leaf must be >= 1");
    if (weight_increment_rate <= 0.0 || weight_increment_rate >= 1.0)
        throw ConfigError("forest: weight_increment_rate must be in (0, 1)");
}

std::vector<uint32_t> bootstrap_indices(size_t n, uint64_t seed) {
    if (n == 0) throw InputError("bootstrap: empty dataset");
    SplitMix64 rng(seed);
    std::vector<uint32_t> out(n);
    for (size_t i = 0; i < n; ++i) out[i] = static_cast<uint32_t>(rng.below(n));
    return out;
}

Dataset bootstrap_sample(const Dataset& data, uint64_t seed) {
    Dataset out(data.schema());
    out.set_view(data.view());
    out.set_provenance(data.provenance());
    out.reserve(data.size());
    for (uint32_t r : bootstrap_indices(data.size(), seed))
        out.append_row(data.row(r), data.fine_label(r));
    out.note("bootstrap seed=" + std::to_string(seed) + " rows=" + std::to_string(data.size()));
    return out;
}

void penalize_and_refresh(AttributeWeights& weights, const Tree& latest_tree, double rate,
                          SplitMix64& rng) {
    const size_t width = weights.weights.size();
    std::vector<uint32_t> depth = latest_tree.min_test_depth(width);
    for (size_t f = 0; f < width; ++f) {
        if (depth[f] > 0) {
            double d = static_cast<double>(depth[f]);
            double lo = (d - 1.0) / (d + 1.0);
            double hi = d / (d + 1.0);
            double w = lo + rng.unit() * (hi - lo);
            weights.weights[f] = std::clamp(w, 0.01, 1.0);
            weights.last_tested_depth[f] = depth[f];
        } else {
            // Complement-form recovery: k untouched steps from w0 land on
            // 1 - (1 - w0)(1 - rate)^k.
            double w = weights.weights[f];
            weights.weights[f] = 1.0 - (1.0 - w) * (1.0 - rate);
        }
    }
}

ForestPaModel train_forest(const Dataset& data, const PaTreeParams& params) {
    params.validate();
    if (data.empty()) throw InputError("train: empty dataset");
    ForestPaModel model;
    model.classes = data.view_vocab();
    model.width = data.width();
    model.params = params;

    AttributeWeights weights = AttributeWeights::uniform(data.width());
    SplitMix64 weight_rng(params.seed);

    GrowOptions opts;
    opts.min_leaf = params.min_leaf;
    opts.max_depth = params.max_depth;

    for (size_t i = 1; i <= params.tree_count; ++i) {
        uint64_t tree_seed = params.seed + i;
        std::vector<uint32_t> rows = bootstrap_indices(data.size(), tree_seed);
        model.weight_trace.push_back(weights.weights);
        opts.feature_weights = weights.weights;
        Tree tree = grow_tree(data, rows, opts);
        penalize_and_refresh(weights, tree, params.weight_increment_rate, weight_rng);
        model.trees.push_back(std::move(tree));
        model.tree_seeds.push_back(tree_seed);
    }
    model.final_weights = std::move(weights);
    return model;
}

int32_t ForestPaModel::predict(std::span<const double> x) const {
    std::vector<uint32_t> votes;
    return predict_votes(x, votes);
}

int32_t ForestPaModel::predict_votes(std::span<const double> x,
                                     std::vector<uint32_t>& votes) const {
    if (x.size() != width) throw InputError("predict: record width mismatch");
    votes.assign(classes.size(), 0);
    for (const auto& tree : trees)
        ++votes[static_cast<size_t>(tree.nodes[static_cast<size_t>(tree.route(x))].predicted)];
    int32_t best = 0;
    for (size_t c = 1; c < votes.size(); ++c)
        if (votes[c] > votes[static_cast<size_t>(best)]) best = static_cast<int32_t>(c);
    return best;
}

void ForestPaModel::save(std::ostream& out) const {
    out << "forestpa v1\n";
    out << "width " << width << "\n";
    out << "params tree_count " << params.tree_count << " min_leaf " << params.min_leaf
        << " max_depth " << params.max_depth << " weight_increment_rate "
        << format_double(params.weight_increment_rate) << " seed " << params.seed << "\n";
    out << "classes " << classes.size() << "\n";
    for (const auto& name : classes) out << name << "\n";
    out << "final_weights";
    for (double w : final_weights.weights) out << " " << format_double(w);
    out << "\n";
    out << "final_depths";
    for (uint32_t d : final_weights.last_tested_depth) out << " " << d;
    out << "\n";
    out << "trees " << trees.size() << "\n";
    for (size_t i = 0; i < trees.size(); ++i) {
        out << "tree " << i << " seed " << tree_seeds[i] << "\n";
        out << "grow_weights";
        for (double w : weight_trace[i]) out << " " << format_double(w);
        out << "\n";
        write_tree(out, trees[i]);
    }
}

ForestPaModel ForestPaModel::load(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "forestpa v1")
        throw InputError("forestpa: unrecognized header '" + line + "'");
    ForestPaModel model;
    {
        if (!std::getline(in, line)) throw InputError("forestpa: truncated");
        std::istringstream ls(line);
        std::string tag;
        ls >> tag >> model.width;
        if (tag != "width" || ls.fail()) throw InputError("forestpa: bad width line");
    }
    {
        if (!std::getline(in, line)) throw InputError("forestpa: truncated");
        std::istringstream ls(line);
        std::string tag, key, rate;
        ls >> tag;
        if (tag != "params") throw InputError("forestpa: bad params line");
        ls >> key >> model.params.tree_count >> key >> model.params.min_leaf >> key >>
            model.params.max_depth >> key >> rate >> key >> model.params.seed;
        if (ls.fail()) throw InputError("forestpa: bad params line");
        model.params.weight_increment_rate = parse_double(rate);
    }
    size_t n_classes = 0;
    {
        if (!std::getline(in, line)) throw InputError("forestpa: truncated");
        std::istringstream ls(line);
        std::string tag;
        ls >> tag >> n_classes;
        if (tag != "classes" || ls.fail()) throw InputError("forestpa: bad classes line");
    }
    for (size_t c = 0; c < n_classes; ++c) {
        if (!std::getline(in, line)) throw InputError("forestpa: truncated class list");
        model.classes.push_back(line);
    }
    auto read_weights = [&](const char* tag_want) {
        if (!std::getline(in, line)) throw InputError("forestpa: truncated");
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag != tag_want) throw InputError(std::string("forestpa: expected ") + tag_want);
        std::vector<double> out;
        std::string tok;
        while (ls >> tok) out.push_back(parse_double(tok));
        if (out.size() != model.width) throw InputError("forestpa: weight vector width mismatch");
        return out;
    };
    model.final_weights.weights = read_weights("final_weights");
    {
        if (!std::getline(in, line)) throw InputError("forestpa: truncated");
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag != "final_depths") throw InputError("forestpa: expected final_depths");
        uint32_t d = 0;
        while (ls >> d) model.final_weights.last_tested_depth.push_back(d);
        if (model.final_weights.last_tested_depth.size() != model.width)
            throw InputError("forestpa: depth vector width mismatch");
    }
    size_t n_trees = 0;
    {
        if (!std::getline(in, line)) throw InputError("forestpa: truncated");
        std::istringstream ls(line);
        std::string tag;
        ls >> tag >> n_trees;
        if (tag != "trees" || ls.fail()) throw InputError("forestpa: bad trees line");
    }
    for (size_t i = 0; i < n_trees; ++i) {
        if (!std::getline(in, line)) throw InputError("forestpa: truncated tree list");
        std::istringstream ls(line);
        std::string tag, key;
        size_t idx = 0;
        uint64_t seed = 0;
        ls >> tag >> idx >> key >> seed;
        if (tag != "tree" || key != "seed" || ls.fail() || idx != i)
            throw InputError("forestpa: bad tree header '" + line + "'");
        model.tree_seeds.push_back(seed);
        model.weight_trace.push_back(read_weights("grow_weights"));
        model.trees.push_back(read_tree(in, n_classes));
    }
    return model;
}

}  // namespace hids
