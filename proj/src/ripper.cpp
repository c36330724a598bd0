#include "hids/ripper.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

#include "hids/common.hpp"

namespace hids {

namespace {

constexpr double kMinFoilGain = 1e-12;

}  // namespace

void RipperParams::validate() const {
    if (prune_fraction <= 0.0 || prune_fraction >= 1.0)
        throw ConfigError("ripper: prune_fraction must be in (0, 1)");
    if (min_rule_coverage < 1) throw ConfigError("ripper: min_rule_coverage must be >= 1");
}

double foil_gain(uint64_t p0, uint64_t n0, uint64_t p1, uint64_t n1) {
    if (p1 == 0) throw InputError("foil_gain: refinement covers no positives");
    if (p0 == 0) throw InputError("foil_gain: base rule covers no positives");
    double after = std::log2(static_cast<double>(p1) / static_cast<double>(p1 + n1));
    double before = std::log2(static_cast<double>(p0) / static_cast<double>(p0 + n0));
    return static_cast<double>(p1) * (after - before);
}

namespace {

std::optional<Condition> best_condition(const Dataset& data, const std::vector<uint32_t>& rows,
                                        int32_t target, uint64_t p0, uint64_t n0) {
    const size_t width = data.width();
    double best_gain = kMinFoilGain;
    std::optional<Condition> best;
    std::vector<std::pair<double, char>> vals;
    vals.reserve(rows.size());
    for (size_t f = 0; f < width; ++f) {
        vals.clear();
        for (uint32_t r : rows)
            vals.push_back({data.value(r, f), static_cast<char>(data.view_label(r) == target)});
        std::sort(vals.begin(), vals.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        uint64_t pl = 0, nl = 0;
        size_t i = 0;
        const size_t n = vals.size();
        while (i < n) {
            double v = vals[i].first;
            size_t j = i;
            while (j < n && vals[j].first == v) {
                vals[j].second ? ++pl : ++nl;
                ++j;
            }
            if (j == n) break;
            double hi = vals[j].first;
            double t = std::midpoint(v, hi);
            if (t >= hi) t = v;
            if (pl > 0) {
                double g = foil_gain(p0, n0, pl, nl);
                if (g > best_gain) {
                    best_gain = g;
                    best = Condition{static_cast<int32_t>(f), true, t};
                }
            }
            uint64_t pr = p0 - pl, nr = n0 - nl;
            if (pr > 0) {
                double g = foil_gain(p0, n0, pr, nr);
                if (g > best_gain) {
                    best_gain = g;
                    best = Condition{static_cast<int32_t>(f), false, t};
                }
            }
            i = j;
        }
    }
    return best;
}

}  // namespace

Rule grow_rule(const Dataset& data, std::span<const uint32_t> rows, int32_t target) {
    Rule rule;
    rule.target = target;
    return grow_rule_from(data, rows, std::move(rule));
}

Rule grow_rule_from(const Dataset& data, std::span<const uint32_t> rows, Rule rule) {
    std::vector<uint32_t> work;
    uint64_t p0 = 0, n0 = 0;
    for (uint32_t r : rows) {
        if (!rule.matches(data.row(r))) continue;
        work.push_back(r);
        data.view_label(r) == rule.target ? ++p0 : ++n0;
    }
    if (p0 == 0) throw InputError("grow_rule: no positive records to cover");
    while (n0 > 0) {
        auto cond = best_condition(data, work, rule.target, p0, n0);
        if (!cond) break;
        rule.conditions.push_back(*cond);
        std::vector<uint32_t> next;
        uint64_t p1 = 0, n1 = 0;
        for (uint32_t r : work) {
            if (!cond->matches(data.row(r))) continue;
            next.push_back(r);
            data.view_label(r) == rule.target ? ++p1 : ++n1;
        }
        work = std::move(next);
        p0 = p1;
        n0 = n1;
    }
    return rule;
}

Rule prune_rule(const Rule& rule, const Dataset& data, std::span<const uint32_t> prune_rows) {
    const size_t len = rule.conditions.size();
    if (len == 0) return rule;
    // Bucket rows by the first condition they fail; a row in bucket L
    // satisfies exactly the prefixes of length <= L.
    std::vector<uint64_t> p(len + 1, 0), n(len + 1, 0);
    for (uint32_t r : prune_rows) {
        auto x = data.row(r);
        size_t L = 0;
        while (L < len && rule.conditions[L].matches(x)) ++L;
        data.view_label(r) == rule.target ? ++p[L] : ++n[L];
    }
    for (size_t L = len; L-- > 0;) {
        p[L] += p[L + 1];
        n[L] += n[L + 1];
    }
    if (p[len] + n[len] == 0) return rule;
    double best_v = -2.0;
    size_t best_len = len;
    for (size_t L = 1; L <= len; ++L) {
        uint64_t cov = p[L] + n[L];
        double v = cov == 0 ? -1.0
                            : (static_cast<double>(p[L]) - static_cast<double>(n[L])) /
                                  static_cast<double>(cov);
        if (v > best_v) {
            best_v = v;
            best_len = L;
        }
    }
    Rule out = rule;
    out.conditions.resize(best_len);
    return out;
}

double count_candidate_conditions(const Dataset& data, std::span<const uint32_t> rows) {
    const size_t width = data.width();
    double total = 0.0;
    std::vector<double> vals;
    vals.reserve(rows.size());
    for (size_t f = 0; f < width; ++f) {
        vals.clear();
        for (uint32_t r : rows) vals.push_back(data.value(r, f));
        std::sort(vals.begin(), vals.end());
        size_t distinct = vals.empty() ? 0 : 1;
        for (size_t i = 1; i < vals.size(); ++i)
            if (vals[i] != vals[i - 1]) ++distinct;
        if (distinct >= 2) total += 2.0 * static_cast<double>(distinct - 1);
    }
    return total;
}

namespace {

double log2_binomial(uint64_t n, uint64_t k) {
    if (k > n) k = n;
    if (n == 0 || k == 0 || k == n) return 0.0;
    return (std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
            std::lgamma(static_cast<double>(n - k) + 1.0)) /
           std::log(2.0);
}

}  // namespace

double ruleset_description_length(const std::vector<Rule>& rules, const Dataset& data,
                                  std::span<const uint32_t> rows, int32_t target,
                                  double n_candidates) {
    if (n_candidates < 0.0) n_candidates = count_candidate_conditions(data, rows);
    double cond_bits = std::log2(std::max(n_candidates, 2.0));
    double model = 0.0;
    for (const auto& rule : rules) {
        double k = static_cast<double>(rule.conditions.size());
        model += k * cond_bits + std::log2(k + 1.0);
    }
    uint64_t covered = 0, fp = 0, uncovered = 0, fn = 0;
    for (uint32_t r : rows) {
        auto x = data.row(r);
        bool positive = data.view_label(r) == target;
        bool matched = std::any_of(rules.begin(), rules.end(),
                                   [&](const Rule& rule) { return rule.matches(x); });
        if (matched) {
            ++covered;
            if (!positive) ++fp;
        } else {
            ++uncovered;
            if (positive) ++fn;
        }
    }
    return model + log2_binomial(covered, fp) + log2_binomial(uncovered, fn);
}

namespace {

struct GrowPruneSplit {
    std::vector<uint32_t> grow;
    std::vector<uint32_t> prune;
};

// Positives and negatives shuffle independently; each stratum sends its
// first (1 - prune_fraction) share to the grow half.
GrowPruneSplit stratified_split(const Dataset& data, const std::vector<uint32_t>& pool,
                                int32_t target, double prune_fraction, uint64_t seed) {
    std::vector<uint32_t> pos, neg;
    for (uint32_t r : pool) (data.view_label(r) == target ? pos : neg).push_back(r);
    SplitMix64 pos_rng(derive_seed(seed, 1));
    SplitMix64 neg_rng(derive_seed(seed, 2));
    pos_rng.shuffle(pos);
    neg_rng.shuffle(neg);
    GrowPruneSplit out;
    auto take = [&](std::vector<uint32_t>& stratum) {
        size_t n_prune = static_cast<size_t>(
            std::floor(static_cast<double>(stratum.size()) * prune_fraction));
        size_t n_grow = stratum.size() - n_prune;
        out.grow.insert(out.grow.end(), stratum.begin(),
                        stratum.begin() + static_cast<ptrdiff_t>(n_grow));
        out.prune.insert(out.prune.end(), stratum.begin() + static_cast<ptrdiff_t>(n_grow),
                         stratum.end());
    };
    take(pos);
    take(neg);
    return out;
}

uint64_t count_positives(const Dataset& data, const std::vector<uint32_t>& rows, int32_t target) {
    uint64_t n = 0;
    for (uint32_t r : rows)
        if (data.view_label(r) == target) ++n;
    return n;
}

std::vector<uint32_t> remove_covered(const Dataset& data, const std::vector<uint32_t>& rows,
                                     const Rule& rule) {
    std::vector<uint32_t> out;
    out.reserve(rows.size());
    for (uint32_t r : rows)
        if (!rule.matches(data.row(r))) out.push_back(r);
    return out;
}

}  // namespace

RuleSet train_ripper(const Dataset& data, const RipperParams& params) {
    params.validate();
    if (data.empty()) throw InputError("train: empty dataset");
    RuleSet rs;
    rs.classes = data.view_vocab();
    rs.width = data.width();
    rs.params = params;
    const size_t n_classes = rs.classes.size();

    std::vector<uint64_t> freq(n_classes, 0);
    for (size_t i = 0; i < data.size(); ++i) ++freq[static_cast<size_t>(data.view_label(i))];

    int32_t def = 0;
    for (size_t c = 1; c < n_classes; ++c)
        if (freq[c] > freq[static_cast<size_t>(def)]) def = static_cast<int32_t>(c);
    rs.default_class = def;

    std::vector<int32_t> order;
    for (size_t c = 0; c < n_classes; ++c)
        if (static_cast<int32_t>(c) != def && freq[c] > 0) order.push_back(static_cast<int32_t>(c));
    std::stable_sort(order.begin(), order.end(), [&](int32_t a, int32_t b) {
        return freq[static_cast<size_t>(a)] < freq[static_cast<size_t>(b)];
    });
    rs.class_order = order;

    std::vector<uint32_t> remaining(data.size());
    std::iota(remaining.begin(), remaining.end(), 0u);

    for (int32_t target : order) {
        const std::vector<uint32_t> stage_rows = remaining;
        double n_cand = count_candidate_conditions(data, stage_rows);
        uint64_t stage_seed = derive_seed(params.seed, 0x521c0000u + static_cast<uint64_t>(target));

        std::vector<Rule> stage_rules;
        double min_dl = ruleset_description_length(stage_rules, data, stage_rows, target, n_cand);
        std::vector<uint32_t> pool = stage_rows;
        size_t rule_counter = 0;

        while (count_positives(data, pool, target) > 0) {
            GrowPruneSplit gp =
                stratified_split(data, pool, target, params.prune_fraction,
                                 derive_seed(stage_seed, rule_counter));
            if (count_positives(data, gp.grow, target) == 0) break;
            Rule rule = prune_rule(grow_rule(data, gp.grow, target), data, gp.prune);

            uint64_t covered_pos = 0;
            for (uint32_t r : pool)
                if (data.view_label(r) == target && rule.matches(data.row(r))) ++covered_pos;
            if (covered_pos < params.min_rule_coverage) break;

            std::vector<Rule> trial = stage_rules;
            trial.push_back(rule);
            double dl = ruleset_description_length(trial, data, stage_rows, target, n_cand);
            if (dl > min_dl + params.dl_slack_bits) break;

            stage_rules = std::move(trial);
            min_dl = std::min(min_dl, dl);
            pool = remove_covered(data, pool, rule);
            ++rule_counter;
        }

        for (size_t pass = 1; pass <= params.optimization_passes; ++pass) {
            for (size_t i = 0; i < stage_rules.size(); ++i) {
                std::vector<uint32_t> pool_i;
                for (uint32_t r : stage_rows) {
                    auto x = data.row(r);
                    bool covered_by_other = false;
                    for (size_t j = 0; j < stage_rules.size(); ++j) {
                        if (j != i && stage_rules[j].matches(x)) {
                            covered_by_other = true;
                            break;
                        }
                    }
                    if (!covered_by_other) pool_i.push_back(r);
                }
                if (count_positives(data, pool_i, target) == 0) continue;
                uint64_t opt_seed = derive_seed(
                    stage_seed, 0x09f70000u + pass * 4096u + i);
                GrowPruneSplit gp =
                    stratified_split(data, pool_i, target, params.prune_fraction, opt_seed);
                if (count_positives(data, gp.grow, target) == 0) continue;

                double best_dl =
                    ruleset_description_length(stage_rules, data, stage_rows, target, n_cand);
                std::optional<Rule> best_rule;

                Rule replacement =
                    prune_rule(grow_rule(data, gp.grow, target), data, gp.prune);
                {
                    std::vector<Rule> trial = stage_rules;
                    trial[i] = replacement;
                    double dl =
                        ruleset_description_length(trial, data, stage_rows, target, n_cand);
                    if (dl < best_dl) {
                        best_dl = dl;
                        best_rule = replacement;
                    }
                }
                uint64_t seed_pos = 0;
                for (uint32_t r : gp.grow)
                    if (data.view_label(r) == target && stage_rules[i].matches(data.row(r)))
                        ++seed_pos;
                if (seed_pos > 0) {
                    Rule revision = prune_rule(
                        grow_rule_from(data, gp.grow, stage_rules[i]), data, gp.prune);
                    std::vector<Rule> trial = stage_rules;
                    trial[i] = revision;
                    double dl =
                        ruleset_description_length(trial, data, stage_rows, target, n_cand);
                    if (dl < best_dl) {
                        best_dl = dl;
                        best_rule = revision;
                    }
                }
                if (best_rule) stage_rules[i] = std::move(*best_rule);
            }
        }

        rs.rules.insert(rs.rules.end(), stage_rules.begin(), stage_rules.end());
        std::vector<uint32_t> next_remaining;
        next_remaining.reserve(remaining.size());
        for (uint32_t r : remaining) {
            auto x = data.row(r);
            bool covered = std::any_of(stage_rules.begin(), stage_rules.end(),
                                       [&](const Rule& rule) { return rule.matches(x); });
            if (!covered) next_remaining.push_back(r);
        }
        remaining = std::move(next_remaining);
    }
    return rs;
}

int32_t RuleSet::predict(std::span<const double> x) const {
    if (x.size() != width) throw InputError("predict: record width mismatch");
    for (const auto& rule : rules)
        if (rule.matches(x)) return rule.target;
    return default_class;
}

void RuleSet::save(std::ostream& out) const {
    out << "ruleset v1\n";
    out << "width " << width << "\n";
    out << "params prune_fraction " << format_double(params.prune_fraction)
        << " optimization_passes " << params.optimization_passes << " dl_slack_bits "
        << format_double(params.dl_slack_bits) << " min_rule_coverage "
        << params.min_rule_coverage << " seed " << params.seed << "\n";
    out << "classes " << classes.size() << "\n";
    for (const auto& name : classes) out << name << "\n";
    out << "order " << class_order.size() << "\n";
    for (int32_t c : class_order) out << classes[static_cast<size_t>(c)] << "\n";
    out << "default " << classes[static_cast<size_t>(default_class)] << "\n";
    out << "rules " << rules.size() << "\n";
    for (const auto& rule : rules) {
        out << "rule " << classes[static_cast<size_t>(rule.target)] << " ::";
        if (rule.conditions.empty()) {
            out << " true";
        } else {
            for (size_t c = 0; c < rule.conditions.size(); ++c) {
                const Condition& cond = rule.conditions[c];
                out << (c == 0 ? " " : " && ") << "x" << cond.feature
                    << (cond.is_leq ? " <= " : " > ") << format_double(cond.threshold);
            }
        }
        out << "\n";
    }
}

namespace {

int32_t class_index_of(const std::vector<std::string>& classes, const std::string& name,
                       const char* what) {
    for (size_t c = 0; c < classes.size(); ++c)
        if (classes[c] == name) return static_cast<int32_t>(c);
    throw InputError(std::string("ruleset: unknown class '") + name + "' in " + what);
}

}  // namespace

RuleSet RuleSet::load(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "ruleset v1")
        throw InputError("ruleset: unrecognized header '" + line + "'");
    RuleSet rs;
    {
        if (!std::getline(in, line)) throw InputError("ruleset: truncated");
        std::istringstream ls(line);
        std::string tag;
        ls >> tag >> rs.width;
        if (tag != "width" || ls.fail()) throw InputError("ruleset: bad width line");
    }
    {
        if (!std::getline(in, line)) throw InputError("ruleset: truncated");
        std::istringstream ls(line);
        std::string tag, key, pf, slack;
        ls >> tag;
        if (tag != "params") throw InputError("ruleset: bad params line");
        ls >> key >> pf >> key >> rs.params.optimization_passes >> key >> slack >> key >>
            rs.params.min_rule_coverage >> key >> rs.params.seed;
        if (ls.fail()) throw InputError("ruleset: bad params line");
        rs.params.prune_fraction = parse_double(pf);
        rs.params.dl_slack_bits = parse_double(slack);
    }
    size_t n_classes = 0;
    {
        if (!std::getline(in, line)) throw InputError("ruleset: truncated");
        std::istringstream ls(line);
        std::string tag;
        ls >> tag >> n_classes;
        if (tag != "classes" || ls.fail()) throw InputError("ruleset: bad classes line");
    }
    for (size_t c = 0; c < n_classes; ++c) {
        if (!std::getline(in, line)) throw InputError("ruleset: truncated class list");
        rs.classes.push_back(line);
    }
    size_t n_order = 0;
    {
        if (!std::getline(in, line)) throw InputError("ruleset: truncated");
        std::istringstream ls(line);
        std::string tag;
        ls >> tag >> n_order;
        if (tag != "order" || ls.fail()) throw InputError("ruleset: bad order line");
    }
    for (size_t c = 0; c < n_order; ++c) {
        if (!std::getline(in, line)) throw InputError("ruleset: truncated order list");
        rs.class_order.push_back(class_index_of(rs.classes, line, "order"));
    }
    {
        if (!std::getline(in, line) || !line.starts_with("default "))
            throw InputError("ruleset: bad default line");
        rs.default_class = class_index_of(rs.classes, line.substr(8), "default");
    }
    size_t n_rules = 0;
    {
        if (!std::getline(in, line)) throw InputError("ruleset: truncated");
        std::istringstream ls(line);
        std::string tag;
        ls >> tag >> n_rules;
        if (tag != "rules" || ls.fail()) throw InputError("ruleset: bad rules line");
    }
    for (size_t i = 0; i < n_rules; ++i) {
        if (!std::getline(in, line)) throw InputError("ruleset: truncated rule list");
        if (!line.starts_with("rule ")) throw InputError("ruleset: bad rule line '" + line + "'");
        size_t sep = line.find(" ::");
        if (sep == std::string::npos) throw InputError("ruleset: bad rule line '" + line + "'");
        Rule rule;
        rule.target = class_index_of(rs.classes, line.substr(5, sep - 5), "rule");
        std::string body = line.substr(sep + 3);
        if (!body.empty() && body.front() == ' ') body.erase(0, 1);
        if (body != "true" && !body.empty()) {
            for (const std::string& tok : split_on(body, " && ")) {
                std::istringstream cs(tok);
                std::string var, op, val;
                cs >> var >> op >> val;
                if (cs.fail() || var.size() < 2 || var[0] != 'x')
                    throw InputError("ruleset: bad condition '" + tok + "'");
                Condition cond;
                cond.feature = static_cast<int32_t>(std::stol(var.substr(1)));
                if (op == "<=")
                    cond.is_leq = true;
                else if (op == ">")
                    cond.is_leq = false;
                else
                    throw InputError("ruleset: bad comparator '" + op + "'");
                cond.threshold = parse_double(val);
                rule.conditions.push_back(cond);
            }
        }
        rs.rules.push_back(std::move(rule));
    }
    return rs;
}

}  // namespace hids
