#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "fsi/io.hpp"

using namespace fsi;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("fsi_io_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream o;
    o << in.rdbuf();
    return o.str();
}

struct VtkSummary {
    int points = 0, cells = 0;
    std::vector<std::string> point_fields, cell_fields;
};

// Checks the legacy ASCII unstructured-grid layout and counts every section.
VtkSummary parse_vtk(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    VtkSummary s;
    std::getline(in, line);
    EXPECT_EQ(line.rfind("# vtk DataFile Version", 0), 0u);
    std::getline(in, line);  // title
    std::getline(in, line);
    EXPECT_EQ(line, "ASCII");
    std::getline(in, line);
    EXPECT_EQ(line, "DATASET UNSTRUCTURED_GRID");
    auto numbers = [&](int count, int width) {
        for (int i = 0; i < count; ++i) {
            std::getline(in, line);
            std::istringstream ls(line);
            double x;
            int got = 0;
            while (ls >> x) {
                EXPECT_TRUE(std::isfinite(x)) << line;
                ++got;
            }
            EXPECT_EQ(got, width) << line;
        }
    };
    std::string key;
    int owner = 0;  // 1 cell data, 2 point data
    while (in >> key) {
        if (key == "POINTS") {
            std::string type;
            in >> s.points >> type;
            std::getline(in, line);
            numbers(s.points, 3);
        } else if (key == "CELLS") {
            int size = 0;
            in >> s.cells >> size;
            std::getline(in, line);
            EXPECT_EQ(size, 4 * s.cells);
            for (int c = 0; c < s.cells; ++c) {
                int n, a, b, d;
                in >> n >> a >> b >> d;
                EXPECT_EQ(n, 3);
                for (int id : {a, b, d}) EXPECT_TRUE(id >= 0 && id < s.points);
            }
        } else if (key == "CELL_TYPES") {
            int n = 0;
            in >> n;
            EXPECT_EQ(n, s.cells);
            for (int c = 0; c < n; ++c) {
                int t;
                in >> t;
                EXPECT_EQ(t, 5);
            }
        } else if (key == "CELL_DATA") {
            int n;
            in >> n;
            EXPECT_EQ(n, s.cells);
            owner = 1;
        } else if (key == "POINT_DATA") {
            int n;
            in >> n;
            EXPECT_EQ(n, s.points);
            owner = 2;
        } else if (key == "SCALARS" || key == "VECTORS") {
            std::string name, type;
            in >> name >> type;
            std::getline(in, line);
            if (key == "SCALARS") {
                std::getline(in, line);
                EXPECT_EQ(line, "LOOKUP_TABLE default");
            }
            (owner == 1 ? s.cell_fields : s.point_fields).push_back(name);
            numbers(owner == 1 ? s.cells : s.points, key == "SCALARS" ? 1 : 3);
        } else {
            ADD_FAILURE() << "unexpected keyword " << key;
            break;
        }
    }
    return s;
}

}  // namespace

TEST(Csv, HeaderOnlyAndOneRow) {
    TempDir d;
    CsvTable t({"a", "b"});
    write_csv(t, d.path / "empty.csv");
    EXPECT_EQ(slurp(d.path / "empty.csv"), "a,b\n");
    EXPECT_TRUE(read_csv(d.path / "empty.csv").rows.empty());
    t.add_numbers({1.5, -2.0});
    write_csv(t, d.path / "one.csv");
    const CsvTable r = read_csv(d.path / "one.csv");
    ASSERT_EQ(r.rows.size(), 1u);
    EXPECT_EQ(r.number(0, "b"), -2.0);
    EXPECT_THROW(t.add({"1"}), std::invalid_argument);
    EXPECT_THROW(r.column("c"), std::out_of_range);
    EXPECT_THROW(read_csv(d.path / "missing.csv"), IoError);
    std::ofstream(d.path / "blank.csv").close();
    EXPECT_THROW(read_csv(d.path / "blank.csv"), IoError);
}

TEST(Csv, NumbersRoundTripBitwise) {
    TempDir d;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CsvTable t({"x", "y"});
    std::vector<double> xs, ys;
    for (int i = 0; i < 500; ++i) {
        xs.push_back(u(rng) * std::pow(10.0, static_cast<int>(u(rng) * 30)));
        ys.push_back(u(rng) * 1e-300);
        t.add_numbers({xs.back(), ys.back()});
    }
    t.add_numbers({0.1, 1.0 / 3.0});
    xs.push_back(0.1);
    ys.push_back(1.0 / 3.0);
    write_csv(t, d.path / "r.csv");
    const CsvTable r = read_csv(d.path / "r.csv");
    const auto rx = r.numbers("x"), ry = r.numbers("y");
    ASSERT_EQ(rx.size(), xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        EXPECT_EQ(rx[i], xs[i]);
        EXPECT_EQ(ry[i], ys[i]);
    }
}

TEST(Csv, LedgerTableHasInitialRowAndOnePerStep) {
    EnergyLedger L;
    L.initial = {1, 2, 3};
    for (int n = 1; n <= 4; ++n) {
        LedgerRow r;
        r.n = n;
        r.Ef = 1.0 / n;
        close_row(r, 1.0);
        L.rows.push_back(r);
    }
    const CsvTable t = ledger_table(L);
    ASSERT_EQ(t.rows.size(), 5u);
    EXPECT_EQ(t.number(0, "E_total"), 6.0);
    EXPECT_EQ(t.number(4, "step"), 4.0);
    EXPECT_EQ(t.number(2, "E_f"), 0.5);
}

TEST(Vtk, ZeroStateGrammarAndCounts) {
    TempDir d;
    const PhysicalParams p = table_t1();
    const Mesh m = build_rect_mesh(p, 6, 3, 2);
    FsiSolver solver(p, m, SchemeOptions::full(), 1e-4);
    const FsiState s = solver.initial_state();
    write_vtk(s, m, d.path / "zero.vtk");
    const VtkSummary v = parse_vtk(d.path / "zero.vtk");
    EXPECT_EQ(v.points, m.fluid.num_nodes() + m.structure.num_nodes());
    EXPECT_EQ(v.cells, m.fluid.num_tris() + m.structure.num_tris());
    EXPECT_EQ(v.cells, 2 * 6 * 3 + 2 * 6 * 2);
    EXPECT_EQ(v.cell_fields, std::vector<std::string>({"region"}));
    EXPECT_EQ(v.point_fields, std::vector<std::string>({"velocity", "pressure", "displacement"}));
}

TEST(Vtk, MovedStateAndMismatch) {
    TempDir d;
    PhysicalParams p = table_t1();
    const Mesh m = build_rect_mesh(p, 8, 3, 2);
    FsiSolver solver(p, m, SchemeOptions::full(), 1e-4);
    FsiState s = solver.initial_state();
    for (int n = 0; n < 3; ++n) solver.step(s, 5000.0, 0.0);
    write_vtk(s, m, d.path / "moved.vtk");
    const VtkSummary v = parse_vtk(d.path / "moved.vtk");
    EXPECT_EQ(v.points, m.fluid.num_nodes() + m.structure.num_nodes());
    FsiState bad = s;
    bad.p.resize(3);
    EXPECT_THROW(write_vtk(bad, m, d.path / "bad.vtk"), std::invalid_argument);
}

TEST(Manifest, ListsExistingFilesOnly) {
    TempDir d;
    write_csv(CsvTable({"a"}), d.path / "a.csv");
    RunManifest man;
    man.command = "fsi_cli example1";
    man.config = "[physical]\nR = 0.5\n";
    man.mesh = mesh_summary(build_rect_mesh(table_t0(), 4, 2, 1));
    man.files = {"a.csv"};
    man.extra = {{"status", "PASS"}};
    man.write(d.path);
    const std::string text = slurp(d.path / "manifest.txt");
    EXPECT_NE(text.find("version = "), std::string::npos);
    EXPECT_NE(text.find("file = a.csv"), std::string::npos);
    EXPECT_NE(text.find("status = PASS"), std::string::npos);
    EXPECT_NE(text.find("fluid 4x2 cells"), std::string::npos);
    man.files.push_back("nope.csv");
    EXPECT_THROW(man.write(d.path), IoError);
}

TEST(Determinism, RepeatedRunsWriteIdenticalBytes) {
    TempDir d;
    const PhysicalParams p = table_t1();
    auto run = [&](const std::string& name) {
        const Mesh m = build_rect_mesh(p, 10, 3, 2);
        FsiSolver solver(p, m, SchemeOptions::full(), 1e-4);
        FsiState s = solver.initial_state();
        EnergyLedger L;
        L.initial = solver.energies(s);
        for (int n = 0; n < 5; ++n) L.rows.push_back(solver.step(s, 1e4, 0.0).ledger);
        write_csv(ledger_table(L), d.path / (name + ".csv"));
        write_vtk(s, m, d.path / (name + ".vtk"));
    };
    run("a");
    run("b");
    EXPECT_EQ(slurp(d.path / "a.csv"), slurp(d.path / "b.csv"));
    EXPECT_EQ(slurp(d.path / "a.vtk"), slurp(d.path / "b.vtk"));
}
