#include "geoexif/store.hpp"

#include <algorithm>
#include <cmath>

#include <sqlite3.h>

namespace geoexif {
namespace {

constexpr const char* schema = R"sql(
CREATE TABLE IF NOT EXISTS analysis (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    root TEXT NOT NULL,
    start_time INTEGER NOT NULL,
    end_time INTEGER,
    files_scanned INTEGER NOT NULL DEFAULT 0,
    images_found INTEGER NOT NULL DEFAULT 0,
    geotagged_count INTEGER NOT NULL DEFAULT 0,
    unreadable_count INTEGER NOT NULL DEFAULT 0
);
CREATE TABLE IF NOT EXISTS devices (
    run_id INTEGER NOT NULL REFERENCES analysis(id),
    fake_id TEXT NOT NULL,
    make TEXT NOT NULL,
    model TEXT NOT NULL,
    ordre INTEGER NOT NULL,
    color INTEGER NOT NULL,
    nb_fake_id INTEGER NOT NULL,
    PRIMARY KEY (run_id, fake_id)
);
CREATE TABLE IF NOT EXISTS assets (
    run_id INTEGER NOT NULL REFERENCES analysis(id),
    id INTEGER NOT NULL,
    name TEXT NOT NULL,
    path TEXT NOT NULL,
    hash TEXT NOT NULL,
    kind TEXT NOT NULL,
    fake_id TEXT NOT NULL,
    datetime INTEGER,
    gps_datetime INTEGER,
    geotagged INTEGER NOT NULL,
    thumb_name TEXT,
    metadata TEXT NOT NULL,
    findings TEXT NOT NULL,
    PRIMARY KEY (run_id, id)
);
CREATE INDEX IF NOT EXISTS assets_device_time ON assets (run_id, fake_id, geotagged, datetime);
CREATE TABLE IF NOT EXISTS markers (
    run_id INTEGER NOT NULL REFERENCES analysis(id),
    id INTEGER NOT NULL,
    name TEXT NOT NULL,
    path TEXT NOT NULL,
    hash TEXT NOT NULL,
    thumb_name TEXT,
    make TEXT NOT NULL,
    model TEXT NOT NULL,
    fake_id TEXT NOT NULL,
    datetime INTEGER,
    gps_datetime INTEGER,
    lat REAL NOT NULL,
    lng REAL NOT NULL,
    lat_e6 INTEGER NOT NULL,
    lng_e6 INTEGER NOT NULL,
    multiples INTEGER NOT NULL,
    reference INTEGER NOT NULL,
    type TEXT NOT NULL,
    color INTEGER NOT NULL,
    ordre INTEGER NOT NULL,
    nb_fake_id INTEGER NOT NULL,
    non_geotag_h1 INTEGER NOT NULL,
    non_geotag_h2 INTEGER NOT NULL,
    non_geotag_h3 INTEGER NOT NULL,
    non_geotag_h4 INTEGER NOT NULL,
    non_geotag_h5 INTEGER NOT NULL,
    non_geotag_h12 INTEGER NOT NULL,
    non_geotag_h24 INTEGER NOT NULL,
    metadata TEXT NOT NULL,
    address TEXT,
    findings TEXT NOT NULL,
    PRIMARY KEY (run_id, id)
);
CREATE INDEX IF NOT EXISTS markers_location ON markers (run_id, lat_e6, lng_e6);
)sql";

constexpr const char* marker_columns =
    "id, name, path, hash, thumb_name, make, model, fake_id, datetime, gps_datetime, lat, lng, "
    "multiples, reference, type, color, ordre, nb_fake_id, non_geotag_h1, non_geotag_h2, "
    "non_geotag_h3, non_geotag_h4, non_geotag_h5, non_geotag_h12, non_geotag_h24, metadata, "
    "address, findings";

constexpr const char* asset_columns =
    "id, name, path, hash, kind, fake_id, datetime, gps_datetime, geotagged, thumb_name, "
    "metadata, findings";

constexpr const char* analysis_columns =
    "id, root, start_time, end_time, files_scanned, images_found, geotagged_count, "
    "unreadable_count";

class Statement {
public:
    Statement(sqlite3* db, const std::string& sql) : db_(db)
    {
        if (sqlite3_prepare_v2(db, sql.c_str(), -1, &stmt_, nullptr) != SQLITE_OK) {
            throw StoreError(std::string("prepare failed: ") + sqlite3_errmsg(db) + " in "
                             + sql);
        }
    }
    ~Statement() { sqlite3_finalize(stmt_); }
    Statement(const Statement&) = delete;
    Statement& operator=(const Statement&) = delete;

    Statement& bind(int i, std::int64_t v)
    {
        check(sqlite3_bind_int64(stmt_, i, v));
        return *this;
    }
    Statement& bind(int i, double v)
    {
        check(sqlite3_bind_double(stmt_, i, v));
        return *this;
    }
    Statement& bind(int i, const std::string& v)
    {
        check(sqlite3_bind_text(stmt_, i, v.c_str(), static_cast<int>(v.size()),
                                SQLITE_TRANSIENT));
        return *this;
    }
    Statement& bind(int i, const std::optional<std::string>& v)
    {
        return v ? bind(i, *v) : bind_null(i);
    }
    Statement& bind(int i, const std::optional<Timestamp>& v)
    {
        return v ? bind(i, to_seconds(*v)) : bind_null(i);
    }
    Statement& bind_null(int i)
    {
        check(sqlite3_bind_null(stmt_, i));
        return *this;
    }

    bool step()
    {
        const int rc = sqlite3_step(stmt_);
        if (rc == SQLITE_ROW) {
            return true;
        }
        if (rc == SQLITE_DONE) {
            return false;
        }
        throw StoreError(std::string("step failed: ") + sqlite3_errmsg(db_));
    }

    void reset()
    {
        sqlite3_reset(stmt_);
        sqlite3_clear_bindings(stmt_);
    }

    std::int64_t i64(int col) const { return sqlite3_column_int64(stmt_, col); }
    double real(int col) const { return sqlite3_column_double(stmt_, col); }
    bool is_null(int col) const { return sqlite3_column_type(stmt_, col) == SQLITE_NULL; }
    std::string text(int col) const
    {
        const auto* p = sqlite3_column_text(stmt_, col);
        return p ? std::string(reinterpret_cast<const char*>(p),
                               static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col)))
                 : std::string();
    }
    std::optional<std::string> opt_text(int col) const
    {
        return is_null(col) ? std::nullopt : std::optional<std::string>(text(col));
    }
    std::optional<Timestamp> opt_time(int col) const
    {
        return is_null(col) ? std::nullopt : std::optional<Timestamp>(from_seconds(i64(col)));
    }

private:
    void check(int rc)
    {
        if (rc != SQLITE_OK) {
            throw StoreError(std::string("bind failed: ") + sqlite3_errmsg(db_));
        }
    }

    sqlite3* db_;
    sqlite3_stmt* stmt_ = nullptr;
};

MarkerRow read_marker(const Statement& s)
{
    MarkerRow m;
    m.id = s.i64(0);
    m.name = s.text(1);
    m.path = s.text(2);
    m.content_hash = s.text(3);
    m.thumb_name = s.opt_text(4);
    m.make = s.text(5);
    m.model = s.text(6);
    m.fake_id = s.text(7);
    m.datetime = s.opt_time(8);
    m.gps_datetime = s.opt_time(9);
    m.lat = s.real(10);
    m.lng = s.real(11);
    m.multiples = static_cast<std::uint32_t>(s.i64(12));
    m.reference = s.i64(13) != 0;
    m.type = s.text(14);
    m.color = static_cast<int>(s.i64(15));
    m.ordre = static_cast<int>(s.i64(16));
    m.nb_fake_id = static_cast<std::uint32_t>(s.i64(17));
    for (std::size_t k = 0; k < m.non_geotag.size(); ++k) {
        m.non_geotag[k] = static_cast<std::uint32_t>(s.i64(18 + static_cast<int>(k)));
    }
    m.metadata = s.text(25);
    m.address = s.opt_text(26);
    m.findings = findings_from_json(s.text(27));
    return m;
}

AssetRow read_asset(const Statement& s)
{
    AssetRow a;
    a.id = s.i64(0);
    a.name = s.text(1);
    a.path = s.text(2);
    a.content_hash = s.text(3);
    a.kind = s.text(4);
    a.fake_id = s.text(5);
    a.datetime = s.opt_time(6);
    a.gps_datetime = s.opt_time(7);
    a.geotagged = s.i64(8) != 0;
    a.thumb_name = s.opt_text(9);
    a.metadata = s.text(10);
    a.findings = findings_from_json(s.text(11));
    return a;
}

AnalysisRow read_analysis(const Statement& s)
{
    AnalysisRow r;
    r.id = s.i64(0);
    r.root = s.text(1);
    r.start_time = from_seconds(s.i64(2));
    r.end_time = s.opt_time(3);
    r.files_scanned = static_cast<std::uint64_t>(s.i64(4));
    r.images_found = static_cast<std::uint64_t>(s.i64(5));
    r.geotagged_count = static_cast<std::uint64_t>(s.i64(6));
    r.unreadable_count = static_cast<std::uint64_t>(s.i64(7));
    return r;
}

bool marker_order(const MarkerRow& a, const MarkerRow& b)
{
    if (a.ordre != b.ordre) {
        return a.ordre < b.ordre;
    }
    if (a.datetime.has_value() != b.datetime.has_value()) {
        return a.datetime.has_value();
    }
    if (a.datetime && *a.datetime != *b.datetime) {
        return *a.datetime < *b.datetime;
    }
    return a.id < b.id;
}

}  // namespace

std::filesystem::path Store::default_path(const std::filesystem::path& workspace)
{
    return workspace / "geoexif.db";
}

Store::Store(const std::filesystem::path& db_path, Mode mode)
{
    const int flags = mode == Mode::read_only ? SQLITE_OPEN_READONLY
                                              : (SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE);
    if (sqlite3_open_v2(db_path.c_str(), &db_, flags | SQLITE_OPEN_FULLMUTEX, nullptr)
        != SQLITE_OK) {
        std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
        sqlite3_close(db_);
        db_ = nullptr;
        throw StoreError("cannot open store " + db_path.string() + ": " + msg);
    }
    sqlite3_busy_timeout(db_, 5000);
    if (mode == Mode::read_write) {
        exec("PRAGMA journal_mode=WAL;");
        exec(schema);
    }
}

Store::~Store()
{
    sqlite3_close(db_);
}

void Store::exec(const char* sql) const
{
    char* err = nullptr;
    if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
        std::string msg = err ? err : "unknown error";
        sqlite3_free(err);
        throw StoreError(msg);
    }
}

void Store::transaction(const std::function<void()>& body)
{
    exec("BEGIN IMMEDIATE;");
    try {
        body();
        exec("COMMIT;");
    } catch (...) {
        sqlite3_exec(db_, "ROLLBACK;", nullptr, nullptr, nullptr);
        throw;
    }
}

RunId Store::begin_run(const std::string& root, Timestamp start)
{
    Statement s(db_, "INSERT INTO analysis (root, start_time) VALUES (?, ?)");
    s.bind(1, root).bind(2, to_seconds(start));
    s.step();
    return sqlite3_last_insert_rowid(db_);
}

void Store::persist_devices(RunId run, std::span<const DeviceRow> rows)
{
    Statement s(db_,
                "INSERT INTO devices (run_id, fake_id, make, model, ordre, color, nb_fake_id) "
                "VALUES (?, ?, ?, ?, ?, ?, ?)");
    for (const auto& d : rows) {
        s.bind(1, run).bind(2, d.fake_id).bind(3, d.make).bind(4, d.model);
        s.bind(5, std::int64_t{d.ordre}).bind(6, std::int64_t{d.color});
        s.bind(7, std::int64_t{d.nb_fake_id});
        s.step();
        s.reset();
    }
}

void Store::persist_assets(RunId run, std::span<const AssetRow> rows)
{
    Statement s(db_, std::string("INSERT INTO assets (run_id, ") + asset_columns
                         + ") VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)");
    for (const auto& a : rows) {
        s.bind(1, run).bind(2, a.id).bind(3, a.name).bind(4, a.path).bind(5, a.content_hash);
        s.bind(6, a.kind).bind(7, a.fake_id).bind(8, a.datetime).bind(9, a.gps_datetime);
        s.bind(10, std::int64_t{a.geotagged ? 1 : 0}).bind(11, a.thumb_name);
        s.bind(12, a.metadata).bind(13, findings_to_json(a.findings));
        s.step();
        s.reset();
    }
}

void Store::persist_markers(RunId run, std::span<const MarkerRow> rows)
{
    Statement s(db_, std::string("INSERT INTO markers (run_id, lat_e6, lng_e6, ") + marker_columns
                         + ") VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, "
                           "?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)");
    for (const auto& m : rows) {
        const auto key = geo::location_key(geo::GeoPoint(m.lat, m.lng));
        s.bind(1, run).bind(2, key.first).bind(3, key.second);
        s.bind(4, m.id).bind(5, m.name).bind(6, m.path).bind(7, m.content_hash);
        s.bind(8, m.thumb_name).bind(9, m.make).bind(10, m.model).bind(11, m.fake_id);
        s.bind(12, m.datetime).bind(13, m.gps_datetime).bind(14, m.lat).bind(15, m.lng);
        s.bind(16, std::int64_t{m.multiples}).bind(17, std::int64_t{m.reference ? 1 : 0});
        s.bind(18, m.type).bind(19, std::int64_t{m.color}).bind(20, std::int64_t{m.ordre});
        s.bind(21, std::int64_t{m.nb_fake_id});
        for (std::size_t k = 0; k < m.non_geotag.size(); ++k) {
            s.bind(22 + static_cast<int>(k), std::int64_t{m.non_geotag[k]});
        }
        s.bind(29, m.metadata).bind(30, m.address).bind(31, findings_to_json(m.findings));
        s.step();
        s.reset();
    }
}

void Store::persist_run(const AnalysisRow& row)
{
    Statement s(db_,
                "UPDATE analysis SET end_time = ?, files_scanned = ?, images_found = ?, "
                "geotagged_count = ?, unreadable_count = ? WHERE id = ?");
    s.bind(1, row.end_time);
    s.bind(2, static_cast<std::int64_t>(row.files_scanned));
    s.bind(3, static_cast<std::int64_t>(row.images_found));
    s.bind(4, static_cast<std::int64_t>(row.geotagged_count));
    s.bind(5, static_cast<std::int64_t>(row.unreadable_count));
    s.bind(6, row.id);
    s.step();
    if (sqlite3_changes(db_) != 1) {
        throw StoreError("unknown run " + std::to_string(row.id));
    }
}

std::optional<AnalysisRow> Store::run(RunId id) const
{
    Statement s(db_, std::string("SELECT ") + analysis_columns + " FROM analysis WHERE id = ?");
    s.bind(1, id);
    if (!s.step()) {
        return std::nullopt;
    }
    return read_analysis(s);
}

std::vector<AnalysisRow> Store::runs() const
{
    Statement s(db_, std::string("SELECT ") + analysis_columns + " FROM analysis ORDER BY id");
    std::vector<AnalysisRow> out;
    while (s.step()) {
        out.push_back(read_analysis(s));
    }
    return out;
}

std::optional<AnalysisRow> Store::latest_finished_run() const
{
    Statement s(db_, std::string("SELECT ") + analysis_columns
                         + " FROM analysis WHERE end_time IS NOT NULL ORDER BY id DESC LIMIT 1");
    if (!s.step()) {
        return std::nullopt;
    }
    return read_analysis(s);
}

std::vector<DeviceRow> Store::devices(RunId run) const
{
    Statement s(db_,
                "SELECT fake_id, make, model, ordre, color, nb_fake_id FROM devices "
                "WHERE run_id = ? ORDER BY ordre");
    s.bind(1, run);
    std::vector<DeviceRow> out;
    while (s.step()) {
        out.push_back({s.text(0), s.text(1), s.text(2), static_cast<int>(s.i64(3)),
                       static_cast<int>(s.i64(4)), static_cast<std::uint32_t>(s.i64(5))});
    }
    return out;
}

std::vector<MarkerRow> Store::markers(RunId run) const
{
    Statement s(db_, std::string("SELECT ") + marker_columns
                         + " FROM markers WHERE run_id = ? ORDER BY id");
    s.bind(1, run);
    std::vector<MarkerRow> out;
    while (s.step()) {
        out.push_back(read_marker(s));
    }
    return out;
}

std::vector<AssetRow> Store::assets(RunId run) const
{
    Statement s(db_, std::string("SELECT ") + asset_columns
                         + " FROM assets WHERE run_id = ? ORDER BY id");
    s.bind(1, run);
    std::vector<AssetRow> out;
    while (s.step()) {
        out.push_back(read_asset(s));
    }
    return out;
}

std::optional<MarkerRow> Store::marker(RunId run, std::int64_t id) const
{
    Statement s(db_, std::string("SELECT ") + marker_columns
                         + " FROM markers WHERE run_id = ? AND id = ?");
    s.bind(1, run).bind(2, id);
    if (!s.step()) {
        return std::nullopt;
    }
    return read_marker(s);
}

std::optional<AssetRow> Store::asset(RunId run, std::int64_t id) const
{
    Statement s(db_, std::string("SELECT ") + asset_columns
                         + " FROM assets WHERE run_id = ? AND id = ?");
    s.bind(1, run).bind(2, id);
    if (!s.step()) {
        return std::nullopt;
    }
    return read_asset(s);
}

std::size_t Store::marker_count(RunId run) const
{
    Statement s(db_, "SELECT COUNT(*) FROM markers WHERE run_id = ?");
    s.bind(1, run);
    s.step();
    return static_cast<std::size_t>(s.i64(0));
}

std::vector<MarkerRow> Store::query_markers(RunId run, const FilterSpec& filter) const
{
    filter.validate();
    std::string sql = std::string("SELECT ") + marker_columns
                      + " FROM markers WHERE run_id = ? AND reference = 1";
    if (filter.devices) {
        if (filter.devices->empty()) {
            return {};
        }
        sql += " AND fake_id IN (";
        for (std::size_t i = 0; i < filter.devices->size(); ++i) {
            sql += i ? ", ?" : "?";
        }
        sql += ")";
    }
    if (filter.date_from) {
        sql += " AND datetime IS NOT NULL AND datetime >= ?";
    }
    if (filter.date_to) {
        sql += " AND datetime IS NOT NULL AND datetime <= ?";
    }
    if (filter.slot_hours) {
        sql += " AND non_geotag_h" + std::to_string(*filter.slot_hours) + " > 0";
    }
    Statement s(db_, sql);
    int i = 1;
    s.bind(i++, run);
    if (filter.devices) {
        for (const auto& d : *filter.devices) {
            s.bind(i++, d);
        }
    }
    if (filter.date_from) {
        s.bind(i++, to_seconds(*filter.date_from));
    }
    if (filter.date_to) {
        s.bind(i++, to_seconds(*filter.date_to));
    }
    std::vector<MarkerRow> rows;
    while (s.step()) {
        rows.push_back(read_marker(s));
    }

    if (filter.zone) {
        // Distance is evaluated here, not in SQL, so it matches geo exactly.
        std::vector<geo::GeoPoint> points;
        points.reserve(rows.size());
        for (const auto& m : rows) {
            points.emplace_back(m.lat, m.lng);
        }
        const auto mask = kernels::zone_mask_parallel(points, *filter.zone);
        std::vector<MarkerRow> kept;
        for (std::size_t k = 0; k < rows.size(); ++k) {
            if (mask[k]) {
                kept.push_back(std::move(rows[k]));
            }
        }
        rows = std::move(kept);
    }
    std::sort(rows.begin(), rows.end(), marker_order);
    return rows;
}

std::vector<AssetRow> Store::linked_non_geotagged(RunId run, std::int64_t marker_id,
                                                  int slot) const
{
    if (!kernels::slot_index(slot)) {
        throw std::invalid_argument("slot must be one of 1,2,3,4,5,12,24");
    }
    const auto m = marker(run, marker_id);
    if (!m) {
        throw NotFound("marker " + std::to_string(marker_id));
    }
    if (!m->datetime) {
        return {};
    }
    Statement s(db_, std::string("SELECT ") + asset_columns
                         + " FROM assets WHERE run_id = ? AND fake_id = ? AND geotagged = 0 "
                           "AND datetime IS NOT NULL AND datetime BETWEEN ? AND ? "
                           "ORDER BY datetime, id");
    const std::int64_t t = to_seconds(*m->datetime);
    const std::int64_t window = std::int64_t{slot} * 3600;
    s.bind(1, run).bind(2, m->fake_id).bind(3, t - window).bind(4, t + window);
    std::vector<AssetRow> out;
    while (s.step()) {
        out.push_back(read_asset(s));
    }
    return out;
}

std::vector<MarkerRow> Store::same_location_group(RunId run, std::int64_t marker_id) const
{
    const auto m = marker(run, marker_id);
    if (!m) {
        throw NotFound("marker " + std::to_string(marker_id));
    }
    const auto key = geo::location_key(geo::GeoPoint(m->lat, m->lng));
    Statement s(db_, std::string("SELECT ") + marker_columns
                         + " FROM markers WHERE run_id = ? AND lat_e6 = ? AND lng_e6 = ? "
                           "ORDER BY reference DESC, path, id");
    s.bind(1, run).bind(2, key.first).bind(3, key.second);
    std::vector<MarkerRow> out;
    while (s.step()) {
        out.push_back(read_marker(s));
    }
    return out;
}

}  // namespace geoexif
