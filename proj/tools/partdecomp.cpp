#include <partdecomp/cumulants.hpp>
#include <partdecomp/distributions.hpp>
#include <partdecomp/expression.hpp>
#include <partdecomp/genwick.hpp>
#include <partdecomp/pathpatch.hpp>
#include <partdecomp/selftest.hpp>
#include <partdecomp/wick.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

using namespace partdecomp;
using Json = nlohmann::ordered_json;

namespace {

// Input problems that are not computation errors.
class InputError : public Error {
public:
    explicit InputError(const std::string& detail) : Error("input", detail) {}
};

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open " + path);
    }
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(path + ": " + e.what());
    }
}

// Numbers keep their shortest decimal spelling; strings may be "p/q".
Rational json_rational(const Json& v) {
    if (v.is_string()) {
        return parse_rational(v.get<std::string>());
    }
    if (v.is_number()) {
        return parse_rational(v.dump());
    }
    throw InputError("expected a number or numeric string, got " + v.dump());
}

DiscreteJoint<Rational> read_distribution(const std::string& path) {
    const Json j = read_json_file(path);
    if (!j.is_object() || !j.contains("n") || !j.contains("support") || !j.contains("probs")) {
        throw InputError(path + ": distribution needs \"n\", \"support\" and \"probs\"");
    }
    std::vector<std::vector<Rational>> support;
    for (const auto& row : j.at("support")) {
        std::vector<Rational> values;
        for (const auto& v : row) {
            values.push_back(json_rational(v));
        }
        support.push_back(std::move(values));
    }
    std::vector<Rational> probs;
    for (const auto& p : j.at("probs")) {
        probs.push_back(json_rational(p));
    }
    return DiscreteJoint<Rational>(j.at("n").get<int>(), std::move(support), std::move(probs));
}

Json integer_json(const Integer& v) {
    if (v >= std::numeric_limits<long long>::min() && v <= std::numeric_limits<long long>::max()) {
        return static_cast<long long>(v);
    }
    return v.str();
}

Json value_json(const Rational& v) { return to_string(v); }
Json value_json(double v) { return v; }

Json index_list(IndexSet s) {
    Json out = Json::array();
    for (int i : s.elements()) {
        out.push_back(i);
    }
    return out;
}

int infer_arity(const Expression& e, int requested, const DiscreteJoint<Rational>& dist) {
    const int n = requested > 0 ? requested : dist.arity();
    if (e.max_variable() > n) {
        throw ArityError("function uses x" + std::to_string(e.max_variable()) + " but n is " + std::to_string(n));
    }
    if (n != dist.arity()) {
        throw ArityError("n is " + std::to_string(n) + " but the distribution has " + std::to_string(dist.arity()) +
                         " variables");
    }
    return n;
}

void require_polynomial(const Expression& e) {
    if (!is_polynomial(e)) {
        throw ExactnessError("--exact needs a polynomial with rational coefficients");
    }
}

// ---------------------------------------------------------------- matrix

std::string matrix_output(int n, const std::string& format) {
    const auto m = coefficient_matrix(n);
    std::ostringstream os;
    if (format == "json") {
        Json j;
        j["order"] = Json::array();
        for (const auto& p : m.order) {
            j["order"].push_back(format_partition(p));
        }
        j["rows"] = Json::array();
        for (const auto& row : m.rows) {
            Json r = Json::array();
            for (const auto& v : row) {
                r.push_back(integer_json(v));
            }
            j["rows"].push_back(r);
        }
        os << j.dump(2) << "\n";
    } else if (format == "csv") {
        for (std::size_t k = 0; k < m.order.size(); ++k) {
            os << (k ? "," : "") << format_partition(m.order[k]);
        }
        os << "\n";
        for (std::size_t r = 0; r < m.order.size(); ++r) {
            os << format_partition(m.order[r]);
            for (const auto& v : m.rows[r]) {
                os << "," << v.str();
            }
            os << "\n";
        }
    } else {
        os << "\\begin{array}{c|" << std::string(m.dimension(), 'r') << "}\n";
        for (const auto& p : m.order) {
            os << " & " << format_partition(p);
        }
        os << " \\\\\n\\hline\n";
        for (std::size_t r = 0; r < m.order.size(); ++r) {
            os << format_partition(m.order[r]);
            for (const auto& v : m.rows[r]) {
                os << " & " << v.str();
            }
            os << " \\\\\n";
        }
        os << "\\end{array}\n";
    }
    return os.str();
}

// ------------------------------------------------------------------ wick

Json wick_json(const WickPolynomial& poly) {
    Json out = Json::array();
    for (const auto& [m, c] : poly) {
        Json factors = Json::array();
        for (MomentFactor f : m.factors) {
            factors.push_back(index_list(f));
        }
        out.push_back(Json{{"free", index_list(m.free)}, {"factors", factors}, {"coef", integer_json(c)}});
    }
    return out;
}

std::string wick_output(int n, const std::string& format) {
    const auto eps = wick_product(n);
    const auto terms = wick_terms(n);
    std::ostringstream os;
    if (format == "json") {
        Json j;
        j["n"] = n;
        j["wick_product"] = wick_json(eps);
        j["text"] = format_wick(eps);
        j["terms"] = Json::array();
        for (const auto& t : terms) {
            j["terms"].push_back(Json{{"subset", index_list(t.subset)},
                                      {"moment", index_list(t.moment)},
                                      {"epsilon", wick_json(t.epsilon)}});
        }
        os << j.dump(2) << "\n";
    } else {
        os << "\\varepsilon(X_{1}, \\ldots, X_{" << n << "}) = " << format_wick_latex(eps) << "\n";
        for (const auto& t : terms) {
            os << "% S = {" << format_index_set(t.subset) << "}: " << format_wick_latex(t.expanded()) << "\n";
        }
    }
    return os.str();
}

// --------------------------------------------------------------- genwick

std::string genwick_output(int n, const std::string& subset, const std::string& partition, bool term,
                           const std::string& format) {
    const IndexSet s = parse_index_set(subset);
    SignedGenSum sum;
    std::string kind;
    if (!partition.empty()) {
        sum = genwick_term_partitioned(n, s, parse_partition(partition));
        kind = "term_partitioned";
    } else if (term) {
        sum = genwick_term(n, s);
        kind = "term";
    } else {
        sum = genwick_product(n, s);
        kind = "product";
    }
    std::ostringstream os;
    if (format == "json") {
        Json j;
        j["n"] = n;
        j["subset"] = index_list(s);
        j["kind"] = kind;
        if (!partition.empty()) {
            j["partition"] = format_partition(parse_partition(partition));
        }
        j["patterns"] = Json::array();
        for (const auto& [p, c] : sum) {
            j["patterns"].push_back(Json{{"averaged", format_partition(p.averaged)},
                                         {"free", index_list(p.free)},
                                         {"coef", integer_json(c)}});
        }
        j["text"] = format_gen_sum(sum);
        os << j.dump(2) << "\n";
    } else {
        os << format_gen_sum_latex(sum) << "\n";
    }
    return os.str();
}

// ------------------------------------------------------------- cumulants

template <Scalar T>
Json cumulants_json(const Expression& e, int n, const DiscreteJoint<Rational>& dist) {
    Json j = Json::object();
    for (const auto& [pi, k] : generalized_cumulants(make_oracle<T>(e, n), dist.as<T>())) {
        j[format_partition(pi)] = value_json(k);
    }
    return j;
}

// --------------------------------------------------------------- pathpatch

template <Scalar T>
Json contributions_json(const std::vector<Contribution<T>>& list) {
    Json out = Json::array();
    for (const auto& c : list) {
        out.push_back(Json{{"partition", format_partition(c.partition)}, {"value", value_json(c.value)}});
    }
    return out;
}

template <Scalar T>
Json pathpatch_json(const Json& graph, const DiscreteJoint<Rational>& dist, const std::string& subset,
                    const std::string& complement) {
    if (!graph.is_object() || !graph.contains("function")) {
        throw InputError("graph needs a \"function\" expression");
    }
    const Expression e = parse_expression(graph.at("function").get<std::string>());
    if constexpr (is_exact_v<T>) {
        require_polynomial(e);
    }
    const int n = infer_arity(e, graph.value("n", 0), dist);
    TreeifiedFunction<T> tf{make_oracle<T>(e, n), graph.value("label_index", n), {}};
    if (graph.contains("names")) {
        tf.names = graph.at("names").get<std::vector<std::string>>();
    }
    std::optional<Partition> rest;
    if (!complement.empty()) {
        rest = parse_partition(complement);
    }
    const auto typed = dist.as<T>();
    const auto report = patching_gap(tf, typed, parse_index_set(subset), rest);

    Json j;
    j["function"] = print_expression(e);
    j["label_index"] = tf.label_index;
    if (!tf.names.empty()) {
        j["names"] = tf.names;
    }
    j["hypothesis"] = index_list(report.hypothesis);
    j["patched_pattern"] = format_partition(report.patched_pattern);
    j["expectation"] = value_json(report.expectation);
    j["patched_expectation"] = value_json(report.patched_expectation);
    j["gap"] = value_json(report.gap);
    j["decomposed_gap"] = value_json(report.decomposed_gap);
    j["ledger_agrees"] = report.ledger_agrees;
    j["admitted"] = contributions_json(report.admitted);
    j["excluded"] = contributions_json(report.excluded);

    std::map<Partition, T, CanonicalLess> cumulants;
    for (const auto& c : report.admitted) {
        cumulants.emplace(c.partition, c.value);
    }
    for (const auto& c : report.excluded) {
        cumulants.emplace(c.partition, c.value);
    }
    Json pairs = Json::array();
    for (int a = 1; a <= n; ++a) {
        for (int b = a + 1; b <= n; ++b) {
            pairs.push_back(Json{{"i", a}, {"j", b}, {"value", value_json(together_importance(cumulants, a, b))}});
        }
    }
    j["together_importance"] = Json{{"definition", kTogetherImportanceDefinition}, {"pairs", pairs}};
    return j;
}

// ---------------------------------------------------------------- errors

int report_error(const std::string& code, const std::string& detail, bool json) {
    std::cerr << "error: " << detail << "\n";
    if (json) {
        std::cout << Json{{"error", code}, {"detail", detail}}.dump() << "\n";
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Partition decompositions: generalized cumulants, Wick products and path-patching ledgers"};
    app.require_subcommand(1);
    app.footer(
        "Examples:\n"
        "  partdecomp matrix --n 2 --format csv\n"
        "  partdecomp wick --n 2\n"
        "  partdecomp genwick --n 3 --subset 1,2 --partition 3\n"
        "  partdecomp cumulants --dist d0.json --function \"x1*x2\" --exact\n"
        "  partdecomp estimate --dist d0.json --function \"x1*x2\" --pattern 1,2 --samples 100000\n"
        "  partdecomp pathpatch --graph toy_graph.json --dist toy_dist.json --subset 1,3 --exact\n"
        "  partdecomp selftest --n 4");

    int n = 0;
    std::string format = "json";
    std::string dist_path;
    std::string function;
    std::string subset;
    std::string partition;
    std::string pattern;
    std::string graph_path;
    bool exact = false;
    bool term = false;
    std::uint64_t samples = 10000;
    std::uint64_t seed = 0;
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());

    auto* matrix = app.add_subcommand("matrix", "Coefficient matrix from pattern expectations to K_f, canonical order");
    matrix->add_option("--n", n, "Number of arguments")->required()->check(CLI::Range(1, 10));
    matrix->add_option("--format", format, "json, csv or latex")->check(CLI::IsMember({"json", "csv", "latex"}));

    auto* wick = app.add_subcommand("wick", "Symbolic Wick product and the Wick terms of x1...xn");
    wick->add_option("--n", n, "Number of variables")->required()->check(CLI::Range(0, 10));
    wick->add_option("--format", format, "json or latex")->check(CLI::IsMember({"json", "latex"}));

    auto* genwick = app.add_subcommand("genwick", "Generalized Wick product omega_S as a signed pattern sum");
    genwick->add_option("--n", n, "Number of arguments")->required()->check(CLI::Range(0, 10));
    genwick->add_option("--subset", subset, "Index set S, e.g. 1,2 (empty for the empty set)")->required();
    genwick->add_option("--partition", partition, "Partition of the complement, e.g. 3|4, for K_{omega_S}(pi)");
    genwick->add_flag("--term", term, "Average the complement jointly (the Wick term W_f(S))");
    genwick->add_option("--format", format, "json or latex")->check(CLI::IsMember({"json", "latex"}));

    auto* cumulants = app.add_subcommand("cumulants", "Every generalized cumulant K_f(pi) of f under a discrete joint");
    cumulants->add_option("--dist", dist_path, "Distribution JSON")->required();
    cumulants->add_option("--function", function, "Expression in x1..xn")->required();
    cumulants->add_option("--n", n, "Arity, if f ignores trailing arguments");
    cumulants->add_flag("--exact", exact, "Rational arithmetic (polynomials only)");

    auto* estimate = app.add_subcommand("estimate", "Monte Carlo estimate of one pattern expectation");
    estimate->add_option("--dist", dist_path, "Distribution JSON")->required();
    estimate->add_option("--function", function, "Expression in x1..xn")->required();
    estimate->add_option("--pattern", pattern, "Evaluation pattern, e.g. 1,2|3")->required();
    estimate->add_option("--samples", samples, "Number of samples")->check(CLI::Range(std::uint64_t{2}, std::uint64_t{1} << 40));
    estimate->add_option("--seed", seed, "Seed");
    estimate->add_option("--workers", workers, "Threads; the result does not depend on this")->check(CLI::Range(1u, 1024u));
    estimate->add_option("--n", n, "Arity, if f ignores trailing arguments");

    auto* pathpatch = app.add_subcommand("pathpatch", "Patching gap of a hypothesis and its cumulant ledger");
    pathpatch->add_option("--graph", graph_path, "Treeified function JSON: {function, label_index, names}")->required();
    pathpatch->add_option("--dist", dist_path, "Distribution JSON")->required();
    pathpatch->add_option("--subset", subset, "Hypothesis S, containing the label index")->required();
    pathpatch->add_option("--complement-partition", partition, "Blocks of the complement resampled independently");
    pathpatch->add_option("--format", format, "json")->check(CLI::IsMember({"json"}));
    pathpatch->add_flag("--exact", exact, "Rational arithmetic (polynomials only)");

    auto* selftest = app.add_subcommand("selftest", "Run the invariant suites");
    selftest->add_option("--n", n, "Largest ground set")->required()->check(CLI::Range(1, 6));
    selftest->add_option("--seed", seed, "Seed for the random joints");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    const bool json = format == "json";
    try {
        if (matrix->parsed()) {
            std::cout << matrix_output(n, format);
        } else if (wick->parsed()) {
            std::cout << wick_output(n, format);
        } else if (genwick->parsed()) {
            std::cout << genwick_output(n, subset, partition, term, format);
        } else if (cumulants->parsed()) {
            const auto dist = read_distribution(dist_path);
            const Expression e = parse_expression(function);
            const int arity = infer_arity(e, n, dist);
            Json j;
            if (exact) {
                require_polynomial(e);
                j = cumulants_json<Rational>(e, arity, dist);
            } else {
                j = cumulants_json<double>(e, arity, dist);
            }
            std::cout << j.dump() << "\n";
        } else if (estimate->parsed()) {
            const auto dist = read_distribution(dist_path);
            const Expression e = parse_expression(function);
            const int arity = infer_arity(e, n, dist);
            const Partition p = parse_partition(pattern);
            const auto r =
                monte_carlo_pattern_expectation(make_oracle<double>(e, arity), dist.as<double>(), p, {samples, seed, workers});
            std::cout << Json{{"pattern", format_partition(p)},
                              {"estimate", r.estimate},
                              {"stderr", r.stderr_},
                              {"samples", r.samples},
                              {"seed", r.seed}}
                             .dump()
                      << "\n";
        } else if (pathpatch->parsed()) {
            const Json graph = read_json_file(graph_path);
            const auto dist = read_distribution(dist_path);
            const Json j = exact ? pathpatch_json<Rational>(graph, dist, subset, partition)
                                 : pathpatch_json<double>(graph, dist, subset, partition);
            std::cout << j.dump(2) << "\n";
        } else if (selftest->parsed()) {
            const auto checks = run_selftest(n, seed);
            bool all = true;
            Json list = Json::array();
            for (const auto& c : checks) {
                all = all && c.passed;
                list.push_back(Json{{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
            }
            std::cout << Json{{"n", n}, {"passed", all}, {"checks", list}}.dump(2) << "\n";
            return all ? 0 : 1;
        }
    } catch (const Error& e) {
        return report_error(e.code(), e.what(), json);
    } catch (const nlohmann::json::exception& e) {
        return report_error("input", e.what(), json);
    } catch (const std::exception& e) {
        return report_error("internal", e.what(), json);
    }
    return 0;
}
