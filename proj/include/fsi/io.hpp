/**
 * @file io.hpp
 * @brief CSV tables, legacy VTK snapshots and the run manifest.
 *
 * Numbers are written with 17 significant digits so a read-back reproduces
 * them bitwise.
 */
#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mesh.hpp"
#include "params.hpp"
#include "scheme.hpp"

namespace fsi {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A rectangular table of text cells with a header row.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    CsvTable() = default;
    explicit CsvTable(std::vector<std::string> h) : header(std::move(h)) {}

    void add(std::vector<std::string> row) {
        if (row.size() != header.size())
            throw std::invalid_argument("csv row has " + std::to_string(row.size()) + " cells, header has " +
                                        std::to_string(header.size()));
        rows.push_back(std::move(row));
    }

    void add_numbers(const std::vector<double>& vals) {
        std::vector<std::string> r;
        r.reserve(vals.size());
        for (double v : vals) r.push_back(detail::fmt17(v));
        add(std::move(r));
    }

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        throw std::out_of_range("csv column not found: " + name);
    }

    double number(std::size_t row, const std::string& name) const {
        return std::stod(rows.at(row).at(static_cast<std::size_t>(column(name))));
    }

    std::vector<double> numbers(const std::string& name) const {
        std::vector<double> out;
        const auto c = static_cast<std::size_t>(column(name));
        for (const auto& r : rows) out.push_back(std::stod(r[c]));
        return out;
    }
};

namespace detail {
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    cells.push_back(cur);
    return cells;
}
}  // namespace detail

inline void write_csv(const CsvTable& t, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << ',';
            out << cells[i];
        }
        out << '\n';
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
    if (!out) throw IoError("write failed: " + path.string());
}

inline CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty csv file: " + path.string());
    t.header = detail::split_csv_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        t.add(detail::split_csv_line(line));
    }
    return t;
}

/// Ledger rows as a table, one row per step.
inline CsvTable ledger_table(const EnergyLedger& led) {
    CsvTable t({"step", "t", "E_f", "E_s", "E_m", "E_total", "dissipation", "jump_f", "jump_m", "work",
                "pressure_sq", "slack", "relative_slack", "balance_residual"});
    const Energies& e0 = led.initial;
    t.add_numbers({0, 0, e0.Ef, e0.Es, e0.Em, e0.total(), 0, 0, 0, 0, 0, 0, 0, 0});
    for (const auto& r : led.rows)
        t.add_numbers({static_cast<double>(r.n), r.t, r.Ef, r.Es, r.Em, r.total(), r.dissipation, r.jump_f, r.jump_m,
                       r.work, r.pressure_sq, r.slack, r.relative_slack(), r.balance_residual});
    return t;
}

/**
 * Legacy ASCII unstructured grid with the fluid (current coordinates) and the
 * structure (deformed by U) as one dataset. Cells are linear triangles on the
 * element corners; all P2 nodes are written as points.
 */
inline void write_vtk(const FsiState& s, const Mesh& m, const std::filesystem::path& path) {
    const SubMesh& f = m.fluid;
    const SubMesh& st = m.structure;
    const int nfp = f.num_nodes(), nsp = st.num_nodes();
    if (s.v.size() != 2 * nfp || s.U.size() != 2 * nsp || static_cast<int>(s.X.size()) != nfp ||
        s.p.size() != f.num_vertices())
        throw std::invalid_argument("write_vtk: state does not match mesh");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    using detail::fmt17;

    auto pressure_at = [&](int n) {
        const auto& pp = f.parents[n];
        return 0.5 * (s.p[f.vertex_of_node[pp[0]]] + s.p[f.vertex_of_node[pp[1]]]);
    };

    out << "# vtk DataFile Version 3.0\n";
    out << "fsi state t=" << fmt17(s.t) << "\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << nfp + nsp << " double\n";
    for (int n = 0; n < nfp; ++n) out << fmt17(s.X[n].z) << ' ' << fmt17(s.X[n].r) << " 0\n";
    for (int n = 0; n < nsp; ++n)
        out << fmt17(st.ref[n].z + s.U[2 * n]) << ' ' << fmt17(st.ref[n].r + s.U[2 * n + 1]) << " 0\n";

    const int nc = f.num_tris() + st.num_tris();
    out << "CELLS " << nc << ' ' << 4 * nc << "\n";
    for (const auto& t : f.tris) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << "\n";
    for (const auto& t : st.tris) out << "3 " << t[0] + nfp << ' ' << t[1] + nfp << ' ' << t[2] + nfp << "\n";
    out << "CELL_TYPES " << nc << "\n";
    for (int c = 0; c < nc; ++c) out << "5\n";

    out << "CELL_DATA " << nc << "\n";
    out << "SCALARS region int 1\nLOOKUP_TABLE default\n";
    for (int c = 0; c < nc; ++c) out << (c < f.num_tris() ? 0 : 1) << "\n";

    out << "POINT_DATA " << nfp + nsp << "\n";
    out << "VECTORS velocity double\n";
    for (int n = 0; n < nfp; ++n) out << fmt17(s.v[2 * n]) << ' ' << fmt17(s.v[2 * n + 1]) << " 0\n";
    for (int n = 0; n < nsp; ++n) out << fmt17(s.V[2 * n]) << ' ' << fmt17(s.V[2 * n + 1]) << " 0\n";
    out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
    for (int n = 0; n < nfp; ++n) out << fmt17(pressure_at(n)) << "\n";
    for (int n = 0; n < nsp; ++n) out << "0\n";
    out << "VECTORS displacement double\n";
    for (int n = 0; n < nfp; ++n)
        out << fmt17(s.X[n].z - f.ref[n].z) << ' ' << fmt17(s.X[n].r - f.ref[n].r) << " 0\n";
    for (int n = 0; n < nsp; ++n) out << fmt17(s.U[2 * n]) << ' ' << fmt17(s.U[2 * n + 1]) << " 0\n";
    if (!out) throw IoError("write failed: " + path.string());
}

inline constexpr const char* kVersionTag = "fsi-kcbeta 1.0.0";

/// Reproducibility record written next to the outputs of every run.
struct RunManifest {
    std::string command;
    std::string config;   ///< serialized configuration snapshot
    std::string mesh;     ///< mesh metadata
    double wall_seconds = 0.0;
    std::vector<std::string> files;  ///< output files, relative to the output directory
    std::vector<std::pair<std::string, std::string>> extra;

    /// Writes `manifest.txt` into `dir`; every listed file must exist.
    void write(const std::filesystem::path& dir) const {
        for (const auto& f : files)
            if (!std::filesystem::exists(dir / f)) throw IoError("manifest lists a missing file: " + f);
        std::ofstream out(dir / "manifest.txt", std::ios::binary);
        if (!out) throw IoError("cannot write manifest in " + dir.string());
        out << "version = " << kVersionTag << "\n";
        out << "command = " << command << "\n";
        out << "mesh = " << mesh << "\n";
        out << "wall_seconds = " << detail::fmt17(wall_seconds) << "\n";
        for (const auto& [k, v] : extra) out << k << " = " << v << "\n";
        for (const auto& f : files) out << "file = " << f << "\n";
        out << "\n# configuration\n" << config;
        if (!out) throw IoError("write failed: manifest.txt");
    }
};

inline std::string mesh_summary(const Mesh& m) {
    std::ostringstream o;
    o << "fluid " << m.fluid.nx << "x" << m.fluid.ny << " cells (" << m.fluid.num_nodes() << " P2 nodes), structure "
      << m.structure.nx << "x" << m.structure.ny << " cells, L=" << detail::fmt17(m.L) << " R=" << detail::fmt17(m.R)
      << " H=" << detail::fmt17(m.H);
    return o.str();
}

}  // namespace fsi
