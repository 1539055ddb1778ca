#include "upr/mps.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace upr {

namespace {

std::string number(double v) {
    char buf[32];
    for (int prec = 12; prec >= 1; --prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::string(buf).size() <= 12) break;
    }
    return buf;
}

std::string mangle(char prefix, int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%c%07d", prefix, i);
    return buf;
}

class Writer {
public:
    explicit Writer(MpsFormat f) : fixed_(f == MpsFormat::fixed) {}

    void section(const std::string& s) { out_ << s << '\n'; }

    // Fields: code (2-3), name1 (5-12), name2 (15-22), value1 (25-36), name3 (40-47), value2 (50-61).
    void line(const std::string& code, const std::string& n1, const std::string& n2 = {}, const std::string& v1 = {},
              const std::string& n3 = {}, const std::string& v2 = {}) {
        if (!fixed_) {
            out_ << ' ';
            for (const auto* f : {&code, &n1, &n2, &v1, &n3, &v2}) {
                if (!f->empty()) out_ << ' ' << *f;
            }
            out_ << '\n';
            return;
        }
        std::string s(61, ' ');
        auto put = [&](std::size_t col, const std::string& f) { s.replace(col - 1, f.size(), f); };
        put(2, code);
        put(5, n1);
        put(15, n2);
        put(25, v1);
        put(40, n3);
        put(50, v2);
        s.erase(s.find_last_not_of(' ') + 1);
        out_ << s << '\n';
    }

    std::string str() const { return out_.str(); }

private:
    bool fixed_;
    std::ostringstream out_;
};

}  // namespace

MpsFormat mps_format_from_string(const std::string& s) {
    if (s == "fixed") return MpsFormat::fixed;
    if (s == "free") return MpsFormat::free;
    throw std::invalid_argument("unsupported model format: " + s);
}

MpsDocument export_model(const MipModel& model, MpsFormat format) {
    MpsDocument doc;
    const bool fixed = format == MpsFormat::fixed;
    std::vector<std::string> col(model.num_vars()), row(model.num_rows());
    for (int j = 0; j < model.num_vars(); ++j) {
        col[j] = fixed ? mangle('C', j) : model.var(j).name;
        if (fixed) doc.name_map.emplace_back(col[j], model.var(j).name);
    }
    for (int i = 0; i < model.num_rows(); ++i) {
        row[i] = fixed ? mangle('R', i) : model.row(i).name;
        if (fixed) doc.name_map.emplace_back(row[i], model.row(i).name);
    }

    // Column-wise entries.
    std::vector<std::vector<std::pair<int, double>>> entries(model.num_vars());
    for (int i = 0; i < model.num_rows(); ++i) {
        const auto& r = model.row(i);
        for (std::size_t p = 0; p < r.idx.size(); ++p) entries[r.idx[p]].emplace_back(i, r.val[p]);
    }

    Writer w(format);
    w.section("NAME          UPR");
    w.section("ROWS");
    w.line("N", "OBJ");
    for (int i = 0; i < model.num_rows(); ++i) {
        const char* code = model.row(i).sense == Sense::le ? "L" : model.row(i).sense == Sense::ge ? "G" : "E";
        w.line(code, row[i]);
    }
    w.section("COLUMNS");
    bool in_int = false;
    int marker = 0;
    for (int j = 0; j < model.num_vars(); ++j) {
        bool is_int = model.var(j).kind == VarKind::binary;
        if (is_int != in_int) {
            std::string m = fixed ? mangle('M', marker++) : "MARKER" + std::to_string(marker++);
            w.line("", m, "'MARKER'", "", is_int ? "'INTORG'" : "'INTEND'");
            in_int = is_int;
        }
        std::vector<std::pair<std::string, double>> cells;
        if (model.var(j).obj != 0.0) cells.emplace_back("OBJ", model.var(j).obj);
        for (auto [i, v] : entries[j]) cells.emplace_back(row[i], v);
        if (cells.empty()) cells.emplace_back("OBJ", 0.0);
        for (std::size_t p = 0; p < cells.size(); p += 2) {
            if (p + 1 < cells.size())
                w.line("", col[j], cells[p].first, number(cells[p].second), cells[p + 1].first,
                       number(cells[p + 1].second));
            else
                w.line("", col[j], cells[p].first, number(cells[p].second));
        }
    }
    if (in_int) w.line("", fixed ? mangle('M', marker) : "MARKER" + std::to_string(marker), "'MARKER'", "", "'INTEND'");
    w.section("RHS");
    for (int i = 0; i < model.num_rows(); ++i) {
        if (model.row(i).rhs != 0.0) w.line("", "RHS", row[i], number(model.row(i).rhs));
    }
    w.section("BOUNDS");
    for (int j = 0; j < model.num_vars(); ++j) {
        const auto& v = model.var(j);
        if (v.kind == VarKind::binary && v.lb == 0.0 && v.ub == 1.0) {
            w.line("BV", "BND", col[j]);
            continue;
        }
        bool lb_inf = std::isinf(v.lb), ub_inf = std::isinf(v.ub);
        if (lb_inf && ub_inf) {
            w.line("FR", "BND", col[j]);
            continue;
        }
        if (!lb_inf && !ub_inf && v.lb == v.ub) {
            w.line("FX", "BND", col[j], number(v.lb));
            continue;
        }
        if (lb_inf) w.line("MI", "BND", col[j]);
        else if (v.lb != 0.0) w.line("LO", "BND", col[j], number(v.lb));
        if (!ub_inf) w.line("UP", "BND", col[j], number(v.ub));
        else if (v.kind == VarKind::binary) w.line("PL", "BND", col[j]);
    }
    w.section("ENDATA");
    doc.text = w.str();
    return doc;
}

std::string name_map_text(const MpsDocument& doc) {
    std::string s;
    for (const auto& [shortname, original] : doc.name_map) s += shortname + ' ' + original + '\n';
    return s;
}

MipModel import_model(const std::string& text, const std::vector<std::pair<std::string, std::string>>& name_map) {
    std::unordered_map<std::string, std::string> restore(name_map.begin(), name_map.end());
    auto original = [&](const std::string& s) {
        auto it = restore.find(s);
        return it == restore.end() ? s : it->second;
    };

    struct PendingRow {
        std::string name;
        Sense sense;
        std::vector<int> idx;
        std::vector<double> val;
        double rhs = 0.0;
    };
    std::vector<PendingRow> rows;
    std::unordered_map<std::string, int> row_of;
    std::string objective_row;
    std::vector<Variable> vars;
    std::unordered_map<std::string, int> col_of;

    auto col_index = [&](const std::string& name, bool integer) {
        auto [it, fresh] = col_of.emplace(name, static_cast<int>(vars.size()));
        if (fresh) {
            Variable v;
            v.name = original(name);
            v.kind = integer ? VarKind::binary : VarKind::continuous;
            v.lb = 0.0;
            v.ub = std::numeric_limits<double>::infinity();
            vars.push_back(v);
        }
        return it->second;
    };
    auto fail = [](const std::string& line) { throw std::runtime_error("MPS parse error near: " + line); };

    std::istringstream in(text);
    std::string line, section;
    bool integer = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '*') continue;
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        if (line[0] != ' ' && line[0] != '\t') {
            section = tok[0];
            if (section == "ENDATA") break;
            continue;
        }
        if (section == "ROWS") {
            if (tok.size() != 2) fail(line);
            if (tok[0] == "N") {
                if (objective_row.empty()) objective_row = tok[1];
                continue;
            }
            Sense s = tok[0] == "L" ? Sense::le : tok[0] == "G" ? Sense::ge : tok[0] == "E" ? Sense::eq : Sense::le;
            if (tok[0] != "L" && tok[0] != "G" && tok[0] != "E") fail(line);
            row_of[tok[1]] = static_cast<int>(rows.size());
            rows.push_back({original(tok[1]), s, {}, {}, 0.0});
        } else if (section == "COLUMNS") {
            if (tok.size() >= 3 && tok[1] == "'MARKER'") {
                integer = tok.back() == "'INTORG'";
                continue;
            }
            if (tok.size() != 3 && tok.size() != 5) fail(line);
            int j = col_index(tok[0], integer);
            for (std::size_t p = 1; p + 1 < tok.size(); p += 2) {
                double v = std::stod(tok[p + 1]);
                if (tok[p] == objective_row) {
                    vars[j].obj = v;
                    continue;
                }
                auto it = row_of.find(tok[p]);
                if (it == row_of.end()) fail(line);
                if (v == 0.0) continue;
                rows[it->second].idx.push_back(j);
                rows[it->second].val.push_back(v);
            }
        } else if (section == "RHS") {
            std::size_t start = tok.size() % 2 == 1 ? 1 : 0;
            for (std::size_t p = start; p + 1 < tok.size(); p += 2) {
                if (tok[p] == objective_row) continue;
                auto it = row_of.find(tok[p]);
                if (it == row_of.end()) fail(line);
                rows[it->second].rhs = std::stod(tok[p + 1]);
            }
        } else if (section == "BOUNDS") {
            if (tok.size() < 3) fail(line);
            auto it = col_of.find(tok[2]);
            if (it == col_of.end()) fail(line);
            auto& v = vars[it->second];
            const double inf = std::numeric_limits<double>::infinity();
            const std::string& code = tok[0];
            double val = tok.size() > 3 ? std::stod(tok[3]) : 0.0;
            if (code == "BV") {
                v.kind = VarKind::binary;
                v.lb = 0.0;
                v.ub = 1.0;
            } else if (code == "UP") {
                v.ub = val;
            } else if (code == "LO") {
                v.lb = val;
            } else if (code == "FX") {
                v.lb = v.ub = val;
            } else if (code == "FR") {
                v.lb = -inf;
                v.ub = inf;
            } else if (code == "MI") {
                v.lb = -inf;
            } else if (code == "PL") {
                v.ub = inf;
            } else {
                fail(line);
            }
        } else if (section == "RANGES") {
            throw std::runtime_error("MPS RANGES section is not supported");
        }
    }

    MipModel model;
    for (const auto& v : vars) model.add_var(v.name, v.kind, v.lb, v.ub, v.obj);
    for (auto& r : rows) model.add_row(r.name, std::move(r.idx), std::move(r.val), r.sense, r.rhs);
    return model;
}

}  // namespace upr
