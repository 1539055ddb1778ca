#include <doctest.h>

#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "upr/gen.hpp"
#include "upr/models.hpp"
#include "upr/mps.hpp"

using namespace upr;

namespace {

// Column and row names read back from the section layout, independent of the importer.
std::pair<std::set<std::string>, std::set<std::string>> recount(const std::string& text) {
    std::set<std::string> rows, cols;
    std::istringstream in(text);
    std::string line, section;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '*') continue;
        if (line[0] != ' ') {
            std::istringstream ls(line);
            ls >> section;
            continue;
        }
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (section == "ROWS" && tok.size() == 2 && tok[0] != "N") rows.insert(tok[1]);
        if (section == "COLUMNS" && tok.size() >= 2 && tok[1] != "'MARKER'") cols.insert(tok[0]);
    }
    return {rows, cols};
}

}  // namespace

TEST_CASE("fixed MPS export keeps counts and names fit eight characters") {
    auto inst = fx::make({0, 0, 0}, {{0, 1, 1, 2}, {1, 2, 1, 1}}, {{0, 2}, {0, 2}}, 3);
    auto model = build_full(inst).mip;
    auto doc = export_model(model, MpsFormat::fixed);
    auto [rows, cols] = recount(doc.text);
    CHECK(static_cast<int>(rows.size()) == model.num_rows());
    CHECK(static_cast<int>(cols.size()) == model.num_vars());
    for (const auto& n : rows) CHECK(n.size() <= 8);
    for (const auto& n : cols) CHECK(n.size() <= 8);
    CHECK(doc.name_map.size() == static_cast<std::size_t>(model.num_rows() + model.num_vars()));
}

TEST_CASE("MPS round trip preserves the model") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        TinyParams p;
        p.seed = seed;
        auto model = build_full(gen_tiny(p)).mip;
        for (auto fmt : {MpsFormat::fixed, MpsFormat::free}) {
            auto doc = export_model(model, fmt);
            auto back = import_model(doc.text, doc.name_map);
            CHECK(back.num_binaries() == model.num_binaries());
            CHECK(canonical_form(back) == canonical_form(model));
        }
    }
}

TEST_CASE("empty model exports") {
    auto inst = fx::make({0, 0}, {{0, 1, 1, 1}}, {}, 3);
    auto model = build_full(inst).mip;
    auto back = import_model(export_model(model, MpsFormat::free).text);
    CHECK(back.num_vars() == 1);
    CHECK(canonical_form(back) == canonical_form(model));
}

TEST_CASE("format names parse") {
    CHECK(mps_format_from_string("fixed") == MpsFormat::fixed);
    CHECK(mps_format_from_string("free") == MpsFormat::free);
    CHECK_THROWS(mps_format_from_string("lp"));
}
