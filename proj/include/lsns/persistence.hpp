#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lsns/dissipation.hpp"
#include "lsns/energy_ledger.hpp"
#include "lsns/vorticity.hpp"

namespace lsns::io {

namespace fs = std::filesystem;

/// Numeric table with named columns. Written with 17 significant digits, so reading it back
/// reproduces every double exactly.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const;
};

/// Writes to a temporary sibling and renames it into place.
void write_text_atomic(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);
void write_table(const fs::path& path, const Table& table);
/// Throws ConfigError on a missing file or a malformed row.
Table read_table(const fs::path& path);
/// zlib crc32 of the file contents as 8 hex digits.
std::string file_crc32(const fs::path& path);

Table energy_table(const EnergyLedger& ledger);
EnergyLedger energy_from_table(const Table& table);
/// Pairing columns pairing_1..pairing_n follow the scalar columns; holder_margin is written for plotting only.
Table vorticity_table(const VorticityLedger& ledger);
VorticityLedger vorticity_from_table(const Table& table, double delta, double epsilon, double dt);
/// Columns t, one D column per scale (named by the scale), closure.
Table dr_table(const DRLedger& ledger);
DRLedger dr_from_table(const Table& table, const std::vector<double>& ell_values);

/// Binary state file: "LSNS", format version, M, dealias cutoff, dt, stride, then one record per
/// stored state (step index and the retained modes, component-major in flat order). Native byte order.
class SnapshotWriter {
public:
    SnapshotWriter(const fs::path& path, const Grid& grid, double dt, int stride);
    ~SnapshotWriter();
    SnapshotWriter(const SnapshotWriter&) = delete;
    SnapshotWriter& operator=(const SnapshotWriter&) = delete;

    int stride() const noexcept { return stride_; }
    /// Throws ContractViolation if u carries modes outside the retained band.
    void write(std::int64_t step, const SpectralField& u);
    /// Flushes and renames into place; a writer destroyed without close() leaves no file.
    void close();

private:
    fs::path path_, tmp_;
    Grid grid_;
    int stride_;
    std::FILE* f_ = nullptr;
};

struct Snapshots {
    Grid grid;
    double dt = 0.0;
    int stride = 1;
    std::vector<std::int64_t> steps;
    std::vector<SpectralField> states;
};

/// Throws ConfigError for a missing, foreign or truncated file.
Snapshots read_snapshots(const fs::path& path);

}  // namespace lsns::io
