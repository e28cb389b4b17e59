#include "sitn/io.hpp"

#include <json.hpp>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <limits>
#include <string>
#include <system_error>
#include <vector>

#include "sitn/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "binary formats are little-endian; big-endian hosts need byte "
              "swapping that is not implemented");
static_assert(sizeof(float) == 4 && sizeof(double) == 8,
              "IEEE-754 storage sizes are assumed");

namespace sitn {

namespace {

using json = nlohmann::json;

// --- primitive binary IO ----------------------------------------------------

class BinWriter {
public:
    explicit BinWriter(std::ostream& os) : os_(os) {}

    void bytes(const void* p, std::size_t n) {
        os_.write(static_cast<const char*>(p),
                  static_cast<std::streamsize>(n));
    }
    void u32(std::uint32_t v) { bytes(&v, 4); }
    void u64(std::uint64_t v) { bytes(&v, 8); }
    void f32(float v) { bytes(&v, 4); }
    void f32_array(const double* vals, std::size_t n) {
        std::vector<float> buf(n);
        for (std::size_t i = 0; i < n; ++i) {
            buf[i] = static_cast<float>(vals[i]);
        }
        bytes(buf.data(), 4 * n);
    }

private:
    std::ostream& os_;
};

class BinReader {
public:
    BinReader(std::istream& is, const std::string& path)
        : is_(is), path_(path) {}

    void bytes(void* p, std::size_t n) {
        is_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        require(is_.gcount() == static_cast<std::streamsize>(n),
                errc::corrupt_data, path_ + ": truncated file");
    }
    std::uint32_t u32() {
        std::uint32_t v;
        bytes(&v, 4);
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v;
        bytes(&v, 8);
        return v;
    }
    void f32_array(double* vals, std::size_t n) {
        std::vector<float> buf(n);
        bytes(buf.data(), 4 * n);
        for (std::size_t i = 0; i < n; ++i) {
            vals[i] = static_cast<double>(buf[i]);
        }
    }

private:
    std::istream& is_;
    const std::string& path_;
};

// Writes through a temporary file in the same directory, then renames over
// the target, so readers never observe a half-written file.
void atomic_write(const std::string& path,
                  const std::function<void(std::ostream&)>& body) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        require(os.good(), errc::io_failure, "cannot open " + tmp);
        body(os);
        os.flush();
        require(os.good(), errc::io_failure, "failed writing " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        raise(errc::io_failure, "cannot replace " + path);
    }
}

std::uintmax_t file_size_of(const std::string& path) {
    std::error_code ec;
    const std::uintmax_t size = std::filesystem::file_size(path, ec);
    require(!ec, errc::io_failure, "cannot stat " + path);
    return size;
}

std::ifstream open_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), errc::io_failure, "cannot open " + path);
    return is;
}

constexpr char kLatentMagic[4] = {'S', 'I', 'T', 'N'};
constexpr char kFlowMagic[4] = {'S', 'I', 'T', 'F'};
constexpr std::uint32_t kLatentVersion = 1;
constexpr std::uint32_t kFlowVersion = 1;
constexpr std::uint32_t kRowMajor = 0;

void check_magic(BinReader& r, const char (&magic)[4],
                 const std::string& path, const char* what) {
    char got[4];
    r.bytes(got, 4);
    require(std::memcmp(got, magic, 4) == 0, errc::bad_format,
            path + ": not a " + what + " file (bad magic)");
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    require(ec == std::errc(), errc::io_failure, "number formatting failed");
    return std::string(buf, ptr);
}

double parse_double(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    require(ec == std::errc() && ptr == last, errc::bad_format,
            "not a number: '" + s + "'");
    return v;
}

void write_latents(const std::string& path, const LatentMatrix& latents) {
    require(latents.data.size() == latents.count * latents.dim,
            errc::invalid_input, "latents: ragged matrix");
    atomic_write(path, [&](std::ostream& os) {
        BinWriter w(os);
        w.bytes(kLatentMagic, 4);
        w.u32(kLatentVersion);
        w.u64(latents.count);
        w.u64(latents.dim);
        w.u32(kRowMajor);
        w.f32_array(latents.data.data(), latents.data.size());
    });
}

LatentMatrix read_latents(const std::string& path) {
    const std::uintmax_t size = file_size_of(path);
    std::ifstream is = open_binary(path);
    BinReader r(is, path);
    check_magic(r, kLatentMagic, path, "latent");
    const std::uint32_t version = r.u32();
    require(version == kLatentVersion, errc::bad_format,
            path + ": unsupported latent format version " +
                std::to_string(version));
    const std::uint64_t count = r.u64();
    const std::uint64_t dim = r.u64();
    const std::uint32_t layout = r.u32();
    require(layout == kRowMajor, errc::bad_format,
            path + ": unsupported flattening tag " + std::to_string(layout));
    require(count >= 1 && dim >= 1, errc::corrupt_data,
            path + ": empty latent matrix");
    // Validate the header against the actual byte count before any
    // allocation, so a forged header cannot request absurd memory.
    constexpr std::uintmax_t kHeaderBytes = 4 + 4 + 8 + 8 + 4;
    require(count <= (std::numeric_limits<std::uint64_t>::max() - 16) / 4 / dim,
            errc::corrupt_data, path + ": header overflows the value count");
    const std::uintmax_t want = kHeaderBytes + 4 * count * dim;
    require(size == want, errc::corrupt_data,
            path + ": header promises " + std::to_string(want) +
                " bytes but the file has " + std::to_string(size));
    LatentMatrix m(static_cast<std::size_t>(count),
                   static_cast<std::size_t>(dim));
    r.f32_array(m.data.data(), m.data.size());
    return m;
}

void save_flow(const std::string& path, const FlowModel& model) {
    require(model.dim() > 0, errc::invalid_input,
            "flow: model is not initialised");
    atomic_write(path, [&](std::ostream& os) {
        BinWriter w(os);
        w.bytes(kFlowMagic, 4);
        w.u32(kFlowVersion);
        w.u64(model.dim());
        w.u64(model.width());
        w.u32(static_cast<std::uint32_t>(model.layer_count()));
        for (std::size_t l = 0; l < model.layer_count(); ++l) {
            w.u64(model.layer_rows(l));
            w.u64(model.layer_cols(l));
            w.f32_array(model.layer_weights(l).data(),
                        model.layer_weights(l).size());
            w.f32_array(model.layer_biases(l).data(),
                        model.layer_biases(l).size());
        }
    });
}

FlowModel load_flow(const std::string& path) {
    const std::uintmax_t size = file_size_of(path);
    std::ifstream is = open_binary(path);
    BinReader r(is, path);
    check_magic(r, kFlowMagic, path, "flow model");
    const std::uint32_t version = r.u32();
    require(version == kFlowVersion, errc::bad_format,
            path + ": unsupported flow format version " +
                std::to_string(version));
    const std::uint64_t dim = r.u64();
    const std::uint64_t width = r.u64();
    const std::uint32_t layers = r.u32();
    require(dim >= 1 && width >= 1, errc::corrupt_data,
            path + ": empty model dimensions");
    require(layers == 4, errc::bad_format,
            path + ": expected 4 layers, got " + std::to_string(layers));
    // Shapes are fully determined by (dim, width); validate the byte count
    // before allocating.
    const std::uint64_t expected_params =
        (dim + 8 + 1) * width + 2 * (width + 1) * width + (width + 1) * dim;
    require(width <= (1u << 20) && dim <= (1u << 24), errc::corrupt_data,
            path + ": implausible model dimensions");
    // 28-byte file header, 16 bytes of shape per layer, then f32 parameters.
    const std::uintmax_t want = 28 + 4ull * 16 + 4 * expected_params;
    require(size == want, errc::corrupt_data,
            path + ": header promises " + std::to_string(want) +
                " bytes but the file has " + std::to_string(size));

    std::vector<std::vector<double>> weights, biases;
    for (std::uint32_t l = 0; l < layers; ++l) {
        const std::uint64_t rows = r.u64();
        const std::uint64_t cols = r.u64();
        require(rows >= 1 && cols >= 1 && rows <= (1u << 24) &&
                    cols <= (1u << 24),
                errc::corrupt_data, path + ": implausible layer shape");
        std::vector<double> w(rows * cols), b(rows);
        r.f32_array(w.data(), w.size());
        r.f32_array(b.data(), b.size());
        weights.push_back(std::move(w));
        biases.push_back(std::move(b));
    }
    return FlowModel::from_weights(static_cast<std::size_t>(dim),
                                   static_cast<std::size_t>(width),
                                   std::move(weights), std::move(biases));
}

namespace {

json ecdf_to_json(const Ecdf& e) {
    json arr = json::array();
    for (double v : e.sorted()) arr.push_back(v);
    return arr;
}

Ecdf ecdf_from_json(const json& arr, const std::string& path) {
    require(arr.is_array(), errc::bad_format,
            path + ": expected an array of sorted values");
    std::vector<double> vals;
    vals.reserve(arr.size());
    for (const auto& v : arr) {
        require(v.is_number(), errc::bad_format,
                path + ": non-numeric sample value");
        vals.push_back(v.get<double>());
    }
    return Ecdf::from_sorted(std::move(vals));
}

}  // namespace

void save_calibration(const std::string& path, const CalibrationModel& model) {
    require(model.k() > 0, errc::invalid_input,
            "calibration: model is not fitted");
    json j;
    j["format"] = "sitn-calibration";
    j["version"] = 1;
    j["alpha"] = model.alpha();
    j["split_fraction"] = model.split_fraction();
    j["seed"] = model.seed();
    j["statistics"] = model.stat_names();
    json inner = json::array();
    for (std::size_t i = 0; i < model.k(); ++i) {
        inner.push_back(ecdf_to_json(model.inner(i)));
    }
    j["inner"] = std::move(inner);
    j["outer"] = ecdf_to_json(model.outer());
    atomic_write(path, [&](std::ostream& os) { os << j.dump(2) << "\n"; });
}

CalibrationModel load_calibration(const std::string& path) {
    std::ifstream is(path);
    require(is.good(), errc::io_failure, "cannot open " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        raise(errc::bad_format, path + ": invalid JSON (" + e.what() + ")");
    }
    require(j.is_object() && j.value("format", "") == "sitn-calibration",
            errc::bad_format, path + ": not a calibration model file");
    require(j.value("version", 0) == 1, errc::bad_format,
            path + ": unsupported calibration format version");
    for (const char* key :
         {"format", "version", "alpha", "split_fraction", "seed",
          "statistics", "inner", "outer"}) {
        require(j.contains(key), errc::bad_format,
                path + ": missing key '" + key + "'");
    }
    require(j["statistics"].is_array() && j["inner"].is_array(),
            errc::bad_format, path + ": malformed model structure");
    std::vector<std::string> names;
    for (const auto& v : j["statistics"]) {
        require(v.is_string(), errc::bad_format,
                path + ": statistic names must be strings");
        names.push_back(v.get<std::string>());
    }
    require(names.size() == j["inner"].size(), errc::corrupt_data,
            path + ": statistics and transforms differ in arity");
    std::vector<Ecdf> inner;
    inner.reserve(names.size());
    for (const auto& arr : j["inner"]) {
        inner.push_back(ecdf_from_json(arr, path));
    }
    Ecdf outer = ecdf_from_json(j["outer"], path);
    require(j["alpha"].is_number() && j["split_fraction"].is_number(),
            errc::bad_format, path + ": malformed numeric fields");
    require(j["seed"].is_number_unsigned(), errc::bad_format,
            path + ": seed must be an unsigned integer");
    return CalibrationModel::from_parts(
        std::move(names), std::move(inner), std::move(outer),
        j["alpha"].get<double>(), j["split_fraction"].get<double>(),
        j["seed"].get<std::uint64_t>());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

void write_score_csv(const std::string& path,
                     const std::vector<ScoreRecord>& records) {
    require(!records.empty(), errc::invalid_input,
            "records: nothing to write");
    const auto& extras = records.front().extra;
    for (const ScoreRecord& r : records) {
        require(r.extra.size() == extras.size(), errc::invalid_input,
                "records: inconsistent method columns");
        for (std::size_t i = 0; i < extras.size(); ++i) {
            require(r.extra[i].first == extras[i].first, errc::invalid_input,
                    "records: inconsistent method columns");
        }
    }
    atomic_write(path, [&](std::ostream& os) {
        os << "id,s_ad,s_cv,q_ad,q_cv,s_sitn";
        for (const auto& [name, _] : extras) os << "," << name;
        os << ",label\n";
        for (const ScoreRecord& r : records) {
            os << r.id << "," << format_double(r.s_ad) << ","
               << format_double(r.s_cv) << "," << format_double(r.q_ad) << ","
               << format_double(r.q_cv) << "," << format_double(r.s_sitn);
            for (const auto& [_, v] : r.extra) os << "," << format_double(v);
            os << "," << r.label << "\n";
        }
    });
}

std::vector<ScoreRecord> read_score_csv(const std::string& path) {
    std::ifstream is(path);
    require(is.good(), errc::io_failure, "cannot open " + path);
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), errc::bad_format,
            path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_csv_line(line);
    require(header.size() >= 7, errc::bad_format,
            path + ": expected at least 7 columns");
    const char* fixed[] = {"id", "s_ad", "s_cv", "q_ad", "q_cv", "s_sitn"};
    for (std::size_t i = 0; i < 6; ++i) {
        require(header[i] == fixed[i], errc::bad_format,
                path + ": column " + std::to_string(i + 1) + " must be '" +
                    fixed[i] + "', got '" + header[i] + "'");
    }
    require(header.back() == "label", errc::bad_format,
            path + ": last column must be 'label'");
    std::vector<std::string> methods(header.begin() + 6, header.end() - 1);

    std::vector<ScoreRecord> out;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        require(cells.size() == header.size(), errc::bad_format,
                path + ": line " + std::to_string(lineno) + " has " +
                    std::to_string(cells.size()) + " cells, expected " +
                    std::to_string(header.size()));
        ScoreRecord r;
        try {
            r.id = static_cast<std::size_t>(std::stoull(cells[0]));
            r.s_ad = parse_double(cells[1]);
            r.s_cv = parse_double(cells[2]);
            r.q_ad = parse_double(cells[3]);
            r.q_cv = parse_double(cells[4]);
            r.s_sitn = parse_double(cells[5]);
            for (std::size_t m = 0; m < methods.size(); ++m) {
                r.extra.emplace_back(methods[m], parse_double(cells[6 + m]));
            }
            r.label = std::stoi(cells.back());
        } catch (const Error&) {
            raise(errc::bad_format, path + ": line " + std::to_string(lineno) +
                                        " has a malformed number");
        } catch (const std::exception&) {
            raise(errc::bad_format, path + ": line " + std::to_string(lineno) +
                                        " has a malformed number");
        }
        require(r.label == 0 || r.label == 1 || r.label == -1,
                errc::bad_format,
                path + ": line " + std::to_string(lineno) +
                    " has an invalid label");
        out.push_back(std::move(r));
    }
    require(!out.empty(), errc::bad_format, path + ": no data rows");
    return out;
}

void write_fpr_csv(const std::string& path,
                   const std::vector<FprPoint>& points) {
    require(!points.empty(), errc::invalid_input, "fpr curve: nothing to write");
    atomic_write(path, [&](std::ostream& os) {
        os << "alpha,fpr_raw,fpr_calibrated,fpr_tippett\n";
        for (const FprPoint& p : points) {
            os << format_double(p.alpha) << "," << format_double(p.raw) << ","
               << format_double(p.calibrated) << ","
               << format_double(p.tippett) << "\n";
        }
    });
}

void write_auroc_csv(const std::string& path,
                     const std::vector<MethodResult>& results) {
    require(!results.empty(), errc::invalid_input, "auroc: nothing to write");
    atomic_write(path, [&](std::ostream& os) {
        os << "method,auroc,ci_lo,ci_hi,level,iterations\n";
        for (const MethodResult& r : results) {
            os << r.method << "," << format_double(r.auroc.point) << ","
               << format_double(r.auroc.lo) << "," << format_double(r.auroc.hi)
               << "," << format_double(r.auroc.level) << ","
               << r.auroc.iterations << "\n";
        }
    });
}

namespace {

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                         const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* k : known) {
            if (key == k) {
                ok = true;
                break;
            }
        }
        require(ok, errc::bad_format,
                where + ": unknown key '" + key + "'");
    }
}

double get_number(const json& obj, const char* key, double fallback,
                  const std::string& where) {
    if (!obj.contains(key)) return fallback;
    require(obj[key].is_number(), errc::bad_format,
            where + ": '" + std::string(key) + "' must be a number");
    return obj[key].get<double>();
}

std::uint64_t get_uint(const json& obj, const char* key, std::uint64_t fallback,
                       const std::string& where) {
    if (!obj.contains(key)) return fallback;
    require(obj[key].is_number_unsigned(), errc::bad_format,
            where + ": '" + std::string(key) +
                "' must be a non-negative integer");
    return obj[key].get<std::uint64_t>();
}

std::string get_string(const json& obj, const char* key,
                       const std::string& fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    require(obj[key].is_string(), errc::bad_format,
            where + ": '" + std::string(key) + "' must be a string");
    return obj[key].get<std::string>();
}

bool get_bool(const json& obj, const char* key, bool fallback,
              const std::string& where) {
    if (!obj.contains(key)) return fallback;
    require(obj[key].is_boolean(), errc::bad_format,
            where + ": '" + std::string(key) + "' must be a boolean");
    return obj[key].get<bool>();
}

std::vector<double> get_double_array(const json& obj, const char* key,
                                     const std::string& where) {
    require(obj.contains(key) && obj[key].is_array(), errc::bad_format,
            where + ": '" + std::string(key) + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : obj[key]) {
        require(v.is_number(), errc::bad_format,
                where + ": '" + std::string(key) +
                    "' must be an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream is(path);
    require(is.good(), errc::io_failure, "cannot open " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        raise(errc::bad_format, path + ": invalid JSON (" + e.what() + ")");
    }
    require(j.is_object(), errc::bad_format, path + ": expected a JSON object");
    reject_unknown_keys(j,
                        {"name", "seed", "id", "flow", "ood", "samples",
                         "detector", "methods", "waic_ensemble",
                         "baseline_fit_cap", "bootstrap_iterations", "solver"},
                        path);

    ExperimentConfig cfg;
    cfg.name = get_string(j, "name", cfg.name, path);
    cfg.seed = get_uint(j, "seed", cfg.seed, path);

    require(j.contains("id") && j["id"].is_object(), errc::bad_format,
            path + ": missing 'id' section");
    {
        const json& id = j["id"];
        reject_unknown_keys(id, {"kind", "dim", "mean", "sigma"}, path + ":id");
        const std::string kind = get_string(id, "kind", "white_noise", path);
        require(id.contains("dim"), errc::bad_format,
                path + ": 'id.dim' is required");
        cfg.dim = static_cast<std::size_t>(get_uint(id, "dim", 0, path));
        if (kind == "white_noise") {
            cfg.id_kind = IdDataKind::white_noise;
        } else if (kind == "mixture") {
            cfg.id_kind = IdDataKind::mixture;
            cfg.mixture.dim = cfg.dim;
            cfg.mixture.mean = get_double_array(id, "mean", path + ":id");
            cfg.mixture.sigma = get_double_array(id, "sigma", path + ":id");
        } else {
            raise(errc::bad_format,
                  path + ": unknown id kind '" + kind +
                      "' (known: white_noise, mixture)");
        }
    }

    if (j.contains("flow")) {
        require(j["flow"].is_object(), errc::bad_format,
                path + ": 'flow' must be an object");
        const json& fl = j["flow"];
        reject_unknown_keys(
            fl, {"kind", "steps", "batch", "lr", "cosine_decay", "clip"},
            path + ":flow");
        const std::string kind = get_string(fl, "kind", "identity", path);
        if (kind == "identity") {
            cfg.flow_kind = FlowKind::identity;
        } else if (kind == "trained") {
            cfg.flow_kind = FlowKind::trained;
        } else {
            raise(errc::bad_format, path + ": unknown flow kind '" + kind +
                                        "' (known: identity, trained)");
        }
        cfg.train.steps = static_cast<std::size_t>(
            get_uint(fl, "steps", cfg.train.steps, path));
        cfg.train.batch = static_cast<std::size_t>(
            get_uint(fl, "batch", cfg.train.batch, path));
        cfg.train.lr = get_number(fl, "lr", cfg.train.lr, path);
        cfg.train.cosine_decay =
            get_bool(fl, "cosine_decay", cfg.train.cosine_decay, path);
        cfg.train.clip = get_number(fl, "clip", cfg.train.clip, path);
    }

    require(j.contains("ood") && j["ood"].is_object(), errc::bad_format,
            path + ": missing 'ood' section");
    {
        const json& ood = j["ood"];
        reject_unknown_keys(ood, {"kind", "strength"}, path + ":ood");
        const std::string kind = get_string(ood, "kind", "", path);
        if (kind == "variance_scaled") {
            cfg.ood_kind = OodKind::variance_scaled;
        } else {
            cfg.ood_kind = OodKind::perturbation;
            cfg.perturb_kind = perturb_kind_from_name(kind);
        }
        require(ood.contains("strength"), errc::bad_format,
                path + ": 'ood.strength' is required");
        cfg.ood_strength = get_number(ood, "strength", 0.0, path);
    }

    require(j.contains("samples") && j["samples"].is_object(), errc::bad_format,
            path + ": missing 'samples' section");
    {
        const json& s = j["samples"];
        reject_unknown_keys(s, {"calibration", "id_test", "ood_test"},
                            path + ":samples");
        cfg.n_calibration =
            static_cast<std::size_t>(get_uint(s, "calibration", 0, path));
        cfg.n_id_test =
            static_cast<std::size_t>(get_uint(s, "id_test", 0, path));
        cfg.n_ood_test =
            static_cast<std::size_t>(get_uint(s, "ood_test", 0, path));
    }

    if (j.contains("detector")) {
        require(j["detector"].is_object(), errc::bad_format,
                path + ": 'detector' must be an object");
        const json& det = j["detector"];
        reject_unknown_keys(det, {"alpha", "split_fraction"},
                            path + ":detector");
        cfg.alpha = get_number(det, "alpha", cfg.alpha, path);
        cfg.split_fraction =
            get_number(det, "split_fraction", cfg.split_fraction, path);
    }

    if (j.contains("methods")) {
        require(j["methods"].is_array(), errc::bad_format,
                path + ": 'methods' must be an array of strings");
        for (const auto& v : j["methods"]) {
            require(v.is_string(), errc::bad_format,
                    path + ": 'methods' must be an array of strings");
            cfg.methods.push_back(v.get<std::string>());
        }
    }
    cfg.waic_ensemble = static_cast<std::size_t>(
        get_uint(j, "waic_ensemble", cfg.waic_ensemble, path));
    cfg.baseline_fit_cap = static_cast<std::size_t>(
        get_uint(j, "baseline_fit_cap", cfg.baseline_fit_cap, path));
    cfg.bootstrap_iterations = static_cast<std::size_t>(
        get_uint(j, "bootstrap_iterations", cfg.bootstrap_iterations, path));

    if (j.contains("solver")) {
        require(j["solver"].is_object(), errc::bad_format,
                path + ": 'solver' must be an object");
        const json& sv = j["solver"];
        reject_unknown_keys(sv, {"method", "atol", "rtol", "max_steps",
                                 "fixed_steps"},
                            path + ":solver");
        const std::string method = get_string(sv, "method", "dopri45", path);
        if (method == "dopri45") {
            cfg.solver.method = OdeMethod::dopri45;
        } else if (method == "rk4") {
            cfg.solver.method = OdeMethod::rk4;
        } else {
            raise(errc::bad_format, path + ": unknown solver method '" +
                                        method + "' (known: dopri45, rk4)");
        }
        cfg.solver.atol = get_number(sv, "atol", cfg.solver.atol, path);
        cfg.solver.rtol = get_number(sv, "rtol", cfg.solver.rtol, path);
        cfg.solver.max_steps = static_cast<std::size_t>(
            get_uint(sv, "max_steps", cfg.solver.max_steps, path));
        cfg.solver.fixed_steps = static_cast<std::size_t>(
            get_uint(sv, "fixed_steps", cfg.solver.fixed_steps, path));
    }

    cfg.validate();
    return cfg;
}

}  // namespace sitn
