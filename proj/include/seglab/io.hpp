#pragma once

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "seglab/errors.hpp"
#include "seglab/geometry.hpp"
#include "seglab/solver.hpp"

namespace seglab {

inline constexpr const char* field_dump_header = "i,j,x,y,class,value";
inline constexpr const char* convergence_log_header = "epsilon,outer_iter,component,residual,inner_iters";

/// Shortest round-trippable rendering with 17 significant digits.
inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Writes every node of the grid, rows ordered by j then i.
inline void write_field_dump(std::ostream& os, const ScalarField& field, const DomainMask& mask) {
    const Grid& g = mask.grid();
    if (!(field.grid() == g)) throw InvalidArgument("field grid differs from mask grid");
    os << field_dump_header << '\n';
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            os << i << ',' << j << ',' << format_real(g.x(i)) << ',' << format_real(g.y(j)) << ','
               << to_string(mask.at(i, j)) << ',' << format_real(field(i, j)) << '\n';
}

struct FieldDump {
    Grid grid;
    std::vector<NodeClass> classes;
    ScalarField field;
};

inline NodeClass parse_node_class(const std::string& s) {
    if (s == "interior") return NodeClass::Interior;
    if (s == "boundary") return NodeClass::Boundary;
    if (s == "exterior") return NodeClass::Exterior;
    throw InvalidArgument("unknown node class '" + s + "'");
}

/// Parses a field dump. The grid is rebuilt from the first and last node coordinates.
inline FieldDump read_field_dump(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != field_dump_header) throw InvalidArgument("field dump: bad header");
    struct Row {
        int i, j;
        double x, y, v;
        NodeClass c;
    };
    std::vector<Row> rows;
    int nx = 0, ny = 0, lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok[6];
        for (auto& t : tok)
            if (!std::getline(ls, t, ',')) throw InvalidArgument("field dump: short row at line " + std::to_string(lineno));
        try {
            Row r{std::stoi(tok[0]), std::stoi(tok[1]), std::stod(tok[2]), std::stod(tok[3]), std::stod(tok[5]),
                  parse_node_class(tok[4])};
            nx = std::max(nx, r.i + 1);
            ny = std::max(ny, r.j + 1);
            rows.push_back(r);
        } catch (const std::logic_error&) {
            throw InvalidArgument("field dump: unparsable row at line " + std::to_string(lineno));
        }
    }
    if (rows.size() != static_cast<std::size_t>(nx) * ny || nx < 3 || ny < 3)
        throw InvalidArgument("field dump: row count does not form a grid");
    for (std::size_t k = 0; k < rows.size(); ++k)
        if (rows[k].i != static_cast<int>(k % nx) || rows[k].j != static_cast<int>(k / nx))
            throw InvalidArgument("field dump: rows out of order");
    const double h = (rows.back().x - rows.front().x) / (nx - 1);
    Grid grid(nx, ny, h, {rows.front().x, rows.front().y});
    FieldDump out{grid, std::vector<NodeClass>(rows.size()), ScalarField(grid)};
    for (std::size_t k = 0; k < rows.size(); ++k) {
        out.classes[k] = rows[k].c;
        out.field[k] = rows[k].v;
    }
    return out;
}

inline void write_convergence_log(std::ostream& os, const std::vector<SystemState>& states) {
    os << convergence_log_header << '\n';
    for (const auto& s : states)
        for (const auto& r : s.log)
            os << format_real(r.epsilon) << ',' << r.outer_iter << ',' << r.component << ',' << format_real(r.residual)
               << ',' << r.inner_iters << '\n';
}

/// A diagnostic CSV block: a `# name key=value ...` line, a column header, then rows.
class CsvBlock {
public:
    CsvBlock(std::string name, std::vector<std::string> columns) : name_(std::move(name)), columns_(std::move(columns)) {}

    CsvBlock& param(const std::string& key, const std::string& value) {
        params_.emplace_back(key, value);
        return *this;
    }
    CsvBlock& param(const std::string& key, double value) { return param(key, format_real(value)); }

    CsvBlock& row(const std::vector<std::string>& cells) {
        if (cells.size() != columns_.size()) throw InvalidArgument("csv row width mismatch in " + name_);
        rows_.push_back(cells);
        return *this;
    }

    void write(std::ostream& os) const {
        os << "# " << name_;
        for (const auto& [k, v] : params_) os << ' ' << k << '=' << v;
        os << '\n';
        write_line(os, columns_);
        for (const auto& r : rows_) write_line(os, r);
    }

    std::string str() const {
        std::ostringstream os;
        write(os);
        return os.str();
    }

private:
    static void write_line(std::ostream& os, const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) os << (k ? "," : "") << cells[k];
        os << '\n';
    }

    std::string name_;
    std::vector<std::string> columns_;
    std::vector<std::pair<std::string, std::string>> params_;
    std::vector<std::vector<std::string>> rows_;
};

} // namespace seglab
