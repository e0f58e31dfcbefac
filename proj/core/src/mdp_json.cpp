#include <fstream>
#include <sstream>
#include <stdexcept>

#include "crdrl/csv.hpp"
#include "crdrl/mdp.hpp"
#include "json.hpp"

namespace crdrl {

namespace {

using nlohmann::json;

// nlohmann reports a byte offset; convert it to the line number of the file.
std::size_t line_of_offset(const std::string& text, std::size_t offset) {
    std::size_t line = 1;
    for (std::size_t k = 0; k < offset && k < text.size(); ++k) line += text[k] == '\n';
    return line;
}

json parse_document(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(source, line_of_offset(text, e.byte), "malformed JSON");
    }
}

[[noreturn]] void shape_error(const std::string& source, const std::string& what) {
    throw ParseError(source, 0, what);
}

std::size_t positive_count(const json& doc, const char* key, const std::string& source) {
    if (!doc.contains(key) || !doc[key].is_number_unsigned() || doc[key].get<std::size_t>() == 0) {
        shape_error(source, std::string("'") + key + "' must be a positive integer");
    }
    return doc[key].get<std::size_t>();
}

// Flattens a nested numeric array of the given shape into row-major order.
void flatten(const json& node, std::span<const std::size_t> shape, std::vector<double>& out,
             const std::string& source, const std::string& key) {
    if (shape.empty()) {
        if (!node.is_number()) shape_error(source, "'" + key + "' holds a non-numeric entry");
        out.push_back(node.get<double>());
        return;
    }
    if (!node.is_array() || node.size() != shape.front()) {
        shape_error(source, "'" + key + "' has the wrong shape");
    }
    for (const auto& child : node) flatten(child, shape.subspan(1), out, source, key);
}

std::vector<double> numeric_table(const json& doc, const char* key,
                                  std::initializer_list<std::size_t> shape,
                                  const std::string& source) {
    if (!doc.contains(key)) shape_error(source, std::string("missing '") + key + "'");
    std::vector<std::size_t> dims(shape);
    std::vector<double> out;
    flatten(doc[key], dims, out, source, key);
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

template <class T>
T rethrow_as_parse_error(const std::string& source, auto&& build) {
    try {
        return build();
    } catch (const std::invalid_argument& e) {
        throw ParseError(source, 0, e.what());
    }
}

}  // namespace

FiniteMdp parse_mdp_json(const std::string& text, const std::string& source) {
    const json doc = parse_document(text, source);
    if (!doc.is_object()) shape_error(source, "expected a JSON object");
    const auto s = positive_count(doc, "n_states", source);
    const auto a = positive_count(doc, "n_actions", source);
    if (!doc.contains("gamma") || !doc["gamma"].is_number()) {
        shape_error(source, "'gamma' must be a number");
    }
    auto reward = numeric_table(doc, "reward", {s, a}, source);
    auto transition = numeric_table(doc, "transition", {s, a, s}, source);
    const double gamma = doc["gamma"].get<double>();
    return rethrow_as_parse_error<FiniteMdp>(source, [&] {
        return FiniteMdp(s, a, std::move(reward), std::move(transition), gamma);
    });
}

Policy parse_policy_json(const std::string& text, const std::string& source) {
    const json doc = parse_document(text, source);
    if (!doc.is_object()) shape_error(source, "expected a JSON object");
    const auto s = positive_count(doc, "n_states", source);
    const auto a = positive_count(doc, "n_actions", source);
    auto probs = numeric_table(doc, "probs", {s, a}, source);
    return rethrow_as_parse_error<Policy>(source,
                                          [&] { return Policy(s, a, std::move(probs)); });
}

FiniteMdp load_mdp_json(const std::filesystem::path& path) {
    return parse_mdp_json(read_file(path), path.string());
}

Policy load_policy_json(const std::filesystem::path& path) {
    return parse_policy_json(read_file(path), path.string());
}

std::string mdp_to_json(const FiniteMdp& mdp) {
    json reward = json::array(), transition = json::array();
    for (std::size_t s = 0; s < mdp.n_states(); ++s) {
        json r_row = json::array(), p_block = json::array();
        for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
            r_row.push_back(mdp.reward(s, a));
            const auto row = mdp.transition_row(s, a);
            p_block.push_back(std::vector<double>(row.begin(), row.end()));
        }
        reward.push_back(std::move(r_row));
        transition.push_back(std::move(p_block));
    }
    json doc{{"n_states", mdp.n_states()}, {"n_actions", mdp.n_actions()},
             {"gamma", mdp.gamma()},       {"reward", std::move(reward)},
             {"transition", std::move(transition)}};
    return doc.dump(2);
}

std::string policy_to_json(const Policy& pi) {
    json probs = json::array();
    for (std::size_t s = 0; s < pi.n_states(); ++s) {
        const auto row = pi.row(s);
        probs.push_back(std::vector<double>(row.begin(), row.end()));
    }
    json doc{{"n_states", pi.n_states()}, {"n_actions", pi.n_actions()}, {"probs", probs}};
    return doc.dump(2);
}

}  // namespace crdrl
