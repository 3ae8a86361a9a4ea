#include "lsns/persistence.hpp"

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <utility>

#include <zlib.h>

#include "lsns/errors.hpp"

namespace lsns::io {

namespace {

constexpr char magic[4] = {'L', 'S', 'N', 'S'};
constexpr std::uint32_t snapshot_version = 1;

fs::path temporary_for(const fs::path& path) { return path.string() + ".tmp"; }

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

using EnergyColumn = std::pair<const char*, double LedgerRow::*>;
constexpr EnergyColumn energy_columns[] = {
    {"t", &LedgerRow::t},
    {"initial_energy", &LedgerRow::initial_energy},
    {"l2_energy", &LedgerRow::l2_energy},
    {"local_energy", &LedgerRow::local_energy},
    {"enstrophy", &LedgerRow::enstrophy},
    {"transport", &LedgerRow::transport},
    {"flux", &LedgerRow::flux},
    {"truncation_flux", &LedgerRow::truncation_flux},
    {"compensator", &LedgerRow::compensator},
    {"compensator_unregularized", &LedgerRow::compensator_unregularized},
    {"residual", &LedgerRow::residual},
    {"ito_martingale", &LedgerRow::ito_martingale},
    {"qv_predicted", &LedgerRow::qv_predicted},
    {"qv_realized", &LedgerRow::qv_realized},
    {"qv_ito_realized", &LedgerRow::qv_ito_realized},
};

using VorticityColumn = std::pair<const char*, double VorticityRow::*>;
constexpr VorticityColumn vorticity_columns[] = {
    {"t", &VorticityRow::t},
    {"l1", &VorticityRow::l1},
    {"sqrt_energy", &VorticityRow::sqrt_energy},
    {"energy_weight", &VorticityRow::energy_weight},
    {"w_integral", &VorticityRow::w_integral},
    {"hessian_enstrophy", &VorticityRow::hessian_enstrophy},
    {"hessian_lower", &VorticityRow::hessian_lower},
    {"weighted_enstrophy", &VorticityRow::weighted_enstrophy},
    {"stretching", &VorticityRow::stretching},
    {"noise_compensator", &VorticityRow::noise_compensator},
    {"gradient_norm", &VorticityRow::gradient_norm},
    {"quadrature_defect", &VorticityRow::quadrature_defect},
    {"initial_w", &VorticityRow::initial_w},
    {"viscous_sum", &VorticityRow::viscous_sum},
    {"stretching_sum", &VorticityRow::stretching_sum},
    {"compensator_sum", &VorticityRow::compensator_sum},
    {"gradient_sum", &VorticityRow::gradient_sum},
    {"defect_sum", &VorticityRow::defect_sum},
    {"residual", &VorticityRow::residual},
    {"ito_martingale", &VorticityRow::ito_martingale},
    {"qv_predicted", &VorticityRow::qv_predicted},
    {"qv_realized", &VorticityRow::qv_realized},
};

template <class T>
void put(std::FILE* f, const T& v) {
    if (std::fwrite(&v, sizeof v, 1, f) != 1) throw std::runtime_error("snapshot write failed");
}

template <class T>
bool get(std::ifstream& in, T& v) {
    return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof v));
}

}  // namespace

std::size_t Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw ConfigError("table has no column '" + name + "'");
}

void write_text_atomic(const fs::path& path, const std::string& text) {
    const fs::path tmp = temporary_for(path);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << text;
        out.flush();
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string() + ": cannot open");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_table(const fs::path& path, const Table& table) {
    std::string text;
    for (std::size_t i = 0; i < table.columns.size(); ++i) text += (i ? "," : "") + table.columns[i];
    text += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) text += (i ? "," : "") + format_double(row[i]);
        text += '\n';
    }
    write_text_atomic(path, text);
}

Table read_table(const fs::path& path) {
    std::istringstream in(read_text(path));
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path.string() + ": empty table");
    std::istringstream header(line);
    for (std::string name; std::getline(header, name, ',');) t.columns.push_back(name);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        std::vector<double> row;
        const char* p = line.c_str();
        while (*p) {
            char* end = nullptr;
            errno = 0;
            const double v = std::strtod(p, &end);
            if (end == p) throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": not a number");
            row.push_back(v);
            p = end;
            if (*p == ',') ++p;
        }
        if (row.size() != t.columns.size())
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                              std::to_string(t.columns.size()) + " values");
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::string file_crc32(const fs::path& path) {
    const std::string s = read_text(path);
    const uLong crc = crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(s.data()), static_cast<uInt>(s.size()));
    char buf[9];
    std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
    return buf;
}

Table energy_table(const EnergyLedger& ledger) {
    Table t;
    for (const auto& [name, member] : energy_columns) t.columns.emplace_back(name);
    for (const auto& r : ledger.rows) {
        std::vector<double> row;
        for (const auto& [name, member] : energy_columns) row.push_back(r.*member);
        t.rows.push_back(std::move(row));
    }
    return t;
}

EnergyLedger energy_from_table(const Table& table) {
    std::vector<std::size_t> idx;
    for (const auto& [name, member] : energy_columns) idx.push_back(table.column(name));
    EnergyLedger l;
    for (const auto& row : table.rows) {
        LedgerRow r;
        std::size_t i = 0;
        for (const auto& [name, member] : energy_columns) r.*member = row[idx[i++]];
        l.rows.push_back(r);
    }
    return l;
}

Table vorticity_table(const VorticityLedger& ledger) {
    Table t;
    for (const auto& [name, member] : vorticity_columns) t.columns.emplace_back(name);
    t.columns.emplace_back("holder_margin");
    const std::size_t pairings = ledger.rows.empty() ? 0 : ledger.rows.front().noise_pairings.size();
    for (std::size_t k = 0; k < pairings; ++k) t.columns.push_back("pairing_" + std::to_string(k + 1));
    for (const auto& r : ledger.rows) {
        if (r.noise_pairings.size() != pairings) throw ContractViolation("vorticity rows differ in noise terms");
        std::vector<double> row;
        for (const auto& [name, member] : vorticity_columns) row.push_back(r.*member);
        row.push_back(r.holder_margin(ledger.delta));
        row.insert(row.end(), r.noise_pairings.begin(), r.noise_pairings.end());
        t.rows.push_back(std::move(row));
    }
    return t;
}

VorticityLedger vorticity_from_table(const Table& table, double delta, double epsilon, double dt) {
    std::vector<std::size_t> idx;
    for (const auto& [name, member] : vorticity_columns) idx.push_back(table.column(name));
    std::vector<std::size_t> pairing;
    for (std::size_t k = 1;; ++k) {
        const std::string name = "pairing_" + std::to_string(k);
        std::size_t c = table.columns.size();
        for (std::size_t i = 0; i < table.columns.size(); ++i)
            if (table.columns[i] == name) c = i;
        if (c == table.columns.size()) break;
        pairing.push_back(c);
    }
    VorticityLedger l{delta, epsilon, dt, {}};
    for (const auto& row : table.rows) {
        VorticityRow r;
        std::size_t i = 0;
        for (const auto& [name, member] : vorticity_columns) r.*member = row[idx[i++]];
        for (std::size_t c : pairing) r.noise_pairings.push_back(row[c]);
        l.rows.push_back(std::move(r));
    }
    return l;
}

Table dr_table(const DRLedger& ledger) {
    Table t;
    t.columns.emplace_back("t");
    for (double ell : ledger.ell_values) t.columns.push_back("D_" + format_double(ell));
    t.columns.emplace_back("closure");
    for (std::size_t j = 0; j < ledger.times.size(); ++j) {
        std::vector<double> row{ledger.times[j]};
        for (const auto& s : ledger.series) row.push_back(s[j]);
        row.push_back(ledger.closure[j]);
        t.rows.push_back(std::move(row));
    }
    return t;
}

DRLedger dr_from_table(const Table& table, const std::vector<double>& ell_values) {
    DRLedger l;
    l.ell_values = ell_values;
    const std::size_t tc = table.column("t"), cc = table.column("closure");
    std::vector<std::size_t> sc;
    for (double ell : ell_values) sc.push_back(table.column("D_" + format_double(ell)));
    l.series.resize(ell_values.size());
    for (const auto& row : table.rows) {
        l.times.push_back(row[tc]);
        l.closure.push_back(row[cc]);
        for (std::size_t i = 0; i < sc.size(); ++i) l.series[i].push_back(row[sc[i]]);
    }
    for (std::size_t i = 0; i + 1 < l.series.size(); ++i) {
        double w = 0.0;
        for (std::size_t j = 0; j < l.series[i].size(); ++j) w = std::max(w, std::abs(l.series[i][j] - l.series[i + 1][j]));
        l.cauchy_differences.push_back(w);
    }
    return l;
}

SnapshotWriter::SnapshotWriter(const fs::path& path, const Grid& grid, double dt, int stride)
    : path_(path), tmp_(temporary_for(path)), grid_(grid), stride_(stride) {
    if (stride < 1) throw ConfigError("snapshot stride must be >= 1");
    f_ = std::fopen(tmp_.c_str(), "wb");
    if (!f_) throw std::runtime_error("cannot write " + tmp_.string() + ": " + std::strerror(errno));
    std::fwrite(magic, 1, sizeof magic, f_);
    put(f_, snapshot_version);
    put(f_, static_cast<std::int32_t>(grid.modes_per_axis()));
    put(f_, static_cast<std::int32_t>(grid.dealias_cutoff()));
    put(f_, dt);
    put(f_, static_cast<std::int32_t>(stride));
}

SnapshotWriter::~SnapshotWriter() {
    if (f_) {
        std::fclose(f_);
        std::error_code ec;
        fs::remove(tmp_, ec);
    }
}

void SnapshotWriter::write(std::int64_t step, const SpectralField& u) {
    if (!f_) throw ContractViolation("snapshot writer already closed");
    if (!(u.grid() == grid_)) throw ContractViolation("snapshot grid differs from the file grid");
    put(f_, step);
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            const cplx v = u.at(c, i);
            if (!grid_.retained(grid_.mode(i))) {
                if (v != cplx(0.0, 0.0)) throw ContractViolation("state carries a mode outside the retained band");
                continue;
            }
            put(f_, v.real());
            put(f_, v.imag());
        }
}

void SnapshotWriter::close() {
    if (!f_) return;
    const bool ok = std::fflush(f_) == 0;
    std::fclose(f_);
    f_ = nullptr;
    if (!ok) throw std::runtime_error("snapshot flush failed: " + tmp_.string());
    fs::rename(tmp_, path_);
}

Snapshots read_snapshots(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string() + ": cannot open");
    char m[4];
    std::uint32_t version = 0;
    std::int32_t modes = 0, cutoff = 0, stride = 0;
    double dt = 0.0;
    if (!in.read(m, 4) || std::memcmp(m, magic, 4) != 0) throw ConfigError(path.string() + ": not a state file");
    if (!get(in, version) || version != snapshot_version) throw ConfigError(path.string() + ": unsupported version");
    if (!get(in, modes) || !get(in, cutoff) || !get(in, dt) || !get(in, stride))
        throw ConfigError(path.string() + ": truncated header");
    Snapshots s;
    s.grid = Grid(modes, cutoff);
    s.dt = dt;
    s.stride = stride;
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < s.grid.size(); ++i)
        if (s.grid.retained(s.grid.mode(i))) kept.push_back(i);
    std::int64_t step = 0;
    while (get(in, step)) {
        SpectralField u(s.grid);
        for (int c = 0; c < 3; ++c)
            for (std::size_t i : kept) {
                double re = 0.0, im = 0.0;
                if (!get(in, re) || !get(in, im)) throw ConfigError(path.string() + ": truncated record");
                u.at(c, i) = cplx(re, im);
            }
        s.steps.push_back(step);
        s.states.push_back(std::move(u));
    }
    return s;
}

}  // namespace lsns::io
