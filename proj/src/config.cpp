#include "lsns/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <zlib.h>

#include "lsns/errors.hpp"
#include "lsns/initial_conditions.hpp"
#include "lsns/vorticity.hpp"

#ifndef LSNS_VERSION
#define LSNS_VERSION "unknown"
#endif

namespace lsns {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

// Reads the keys of one JSON object, remembering which were consumed so that unknown keys are rejected.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_, "expected an object");
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string& key) const { return j_.contains(key); }

    const json* find(const std::string& key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out) {
        if (const json* v = find(key)) {
            if (!v->is_number()) fail(at(key), "expected a number");
            out = v->get<double>();
        }
    }
    template <class I>
    void integer(const std::string& key, I& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer()) fail(at(key), "expected an integer");
            if constexpr (std::is_unsigned_v<I>) {
                if (!v->is_number_unsigned()) fail(at(key), "expected a nonnegative integer");
            }
            out = v->get<I>();
        }
    }
    void boolean(const std::string& key, bool& out) {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) fail(at(key), "expected true or false");
            out = v->get<bool>();
        }
    }
    void string(const std::string& key, std::string& out) {
        if (const json* v = find(key)) {
            if (!v->is_string()) fail(at(key), "expected a string");
            out = v->get<std::string>();
        }
    }
    template <class E, class Parse>
    void enumeration(const std::string& key, E& out, Parse parse) {
        std::string name;
        if (!has(key)) {
            find(key);
            return;
        }
        string(key, name);
        try {
            out = parse(name);
        } catch (const ConfigError& e) {
            fail(at(key), e.what());
        }
    }
    template <std::size_t N>
    void triple(const std::string& key, std::array<double, N>& out) {
        if (const json* v = find(key)) out = numbers<N>(*v, at(key));
    }
    void number_list(const std::string& key, std::vector<double>& out) {
        if (const json* v = find(key)) {
            if (!v->is_array()) fail(at(key), "expected an array of numbers");
            out.clear();
            for (std::size_t i = 0; i < v->size(); ++i) {
                if (!(*v)[i].is_number()) fail(at(key) + "[" + std::to_string(i) + "]", "expected a number");
                out.push_back((*v)[i].get<double>());
            }
        }
    }

    template <std::size_t N>
    static std::array<double, N> numbers(const json& v, const std::string& path) {
        if (!v.is_array() || v.size() != N) fail(path, "expected an array of " + std::to_string(N) + " numbers");
        std::array<double, N> out{};
        for (std::size_t i = 0; i < N; ++i) {
            if (!v[i].is_number()) fail(path + "[" + std::to_string(i) + "]", "expected a number");
            out[i] = v[i].get<double>();
        }
        return out;
    }

    void finish() const {
        for (const auto& [key, value] : j_.items())
            if (!seen_.count(key)) fail(at(key), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

// Runs check() and prefixes any ConfigError with the schema path.
template <class F>
void checked(const std::string& path, F check) {
    try {
        check();
    } catch (const ConfigError& e) {
        fail(path, e.what());
    }
}

TestFunctionSpec test_function_from(const json& j, const std::string& path) {
    TestFunctionSpec s;
    Reader r(j, path);
    r.string("name", s.name);
    r.integer("power", s.power);
    r.triple("centre", s.centre);
    if (const json* c = r.find("cutoff"); c && !c->is_null()) s.cutoff = Reader::numbers<3>(*c, r.at("cutoff"));
    r.finish();
    return s;
}

json test_function_to(const TestFunctionSpec& s) {
    json j{{"name", s.name}, {"power", s.power}, {"centre", s.centre}};
    if (s.cutoff) j["cutoff"] = *s.cutoff;
    return j;
}

}  // namespace

InitialKind parse_initial_kind(const std::string& name) {
    if (name == "taylor_green") return InitialKind::taylor_green;
    if (name == "shear") return InitialKind::shear;
    if (name == "random") return InitialKind::random;
    if (name == "zero") return InitialKind::zero;
    throw ConfigError("unknown initial condition '" + name + "'");
}

std::string to_string(InitialKind kind) {
    switch (kind) {
        case InitialKind::taylor_green: return "taylor_green";
        case InitialKind::shear: return "shear";
        case InitialKind::random: return "random";
        case InitialKind::zero: return "zero";
    }
    return "?";
}

SpectralField InitialSpec::build(const Grid& grid) const {
    switch (kind) {
        case InitialKind::taylor_green: return taylor_green(grid, amplitude);
        case InitialKind::shear: return shear_mode(grid, amplitude, wavenumber);
        case InitialKind::random: return random_solenoidal(grid, seed, amplitude, slope);
        case InitialKind::zero: break;
    }
    return SpectralField(grid);
}

TestFunction TestFunctionSpec::build(const Grid& grid) const {
    const TemporalCutoff theta = cutoff ? TemporalCutoff((*cutoff)[0], (*cutoff)[1], (*cutoff)[2]) : TemporalCutoff{};
    return TestFunction::raised_cosine(grid, power, centre, theta);
}

DRConfig DiagnosticsSpec::dr_config(const Grid& grid) const {
    DRConfig c = ell_values.empty() ? DRConfig::default_for(grid) : DRConfig{ell_values, alpha_kind};
    c.alpha_kind = alpha_kind;
    return c;
}

DiagnosticsSpec DiagnosticsSpec::from_json(const json& j, const std::string& path) {
    DiagnosticsSpec d;
    Reader r(j, path);
    r.boolean("energy", d.energy);
    r.boolean("vorticity", d.vorticity);
    r.boolean("dissipation", d.dissipation);
    if (const json* tf = r.find("test_functions")) {
        if (!tf->is_array()) fail(r.at("test_functions"), "expected an array");
        d.test_functions.clear();
        for (std::size_t i = 0; i < tf->size(); ++i)
            d.test_functions.push_back(test_function_from((*tf)[i], r.at("test_functions") + "[" + std::to_string(i) + "]"));
    }
    if (const json* dr = r.find("dr")) {
        Reader rd(*dr, r.at("dr"));
        rd.number_list("ell_values", d.ell_values);
        rd.enumeration("alpha_kind", d.alpha_kind, parse_mollifier_kind);
        rd.finish();
    }
    r.number("delta", d.delta);
    r.number("s_fraction", d.s_fraction);
    r.finish();
    return d;
}

json DiagnosticsSpec::to_json() const {
    json tfs = json::array();
    for (const auto& s : test_functions) tfs.push_back(test_function_to(s));
    return json{{"energy", energy},
                {"vorticity", vorticity},
                {"dissipation", dissipation},
                {"test_functions", tfs},
                {"dr", {{"ell_values", ell_values}, {"alpha_kind", to_string(alpha_kind)}}},
                {"delta", delta},
                {"s_fraction", s_fraction}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    ExperimentConfig c;
    Reader top(j, "");
    if (!top.has("schema_version")) fail("schema_version", "missing");
    top.integer("schema_version", c.schema_version);
    if (c.schema_version != config_schema_version)
        fail("schema_version", "unsupported version " + std::to_string(c.schema_version));

    if (const json* v = top.find("run")) {
        Reader r(*v, "run");
        r.number("nu", c.run.nu);
        r.number("epsilon", c.run.epsilon);
        r.number("dt", c.run.dt);
        r.number("T", c.run.T);
        int m = c.run.grid.modes_per_axis(), cutoff = -1;
        r.integer("M", m);
        r.integer("dealias_cutoff", cutoff);
        checked("run.M", [&] { c.run.grid = Grid(m, cutoff); });
        r.enumeration("scheme", c.run.scheme, parse_scheme);
        r.enumeration("mollifier", c.run.mollifier, parse_mollifier_kind);
        r.finish();
    }
    if (const json* v = top.find("noise")) {
        Reader r(*v, "noise");
        r.enumeration("kind", c.noise.kind, parse_noise_kind);
        r.number("amplitude", c.noise.amplitude);
        r.number("decay", c.noise.decay);
        r.integer("terms", c.noise.terms);
        r.integer("max_k", c.noise.max_k);
        r.finish();
    }
    if (const json* v = top.find("initial")) {
        Reader r(*v, "initial");
        r.enumeration("kind", c.initial.kind, parse_initial_kind);
        r.number("amplitude", c.initial.amplitude);
        r.integer("wavenumber", c.initial.wavenumber);
        r.integer("seed", c.initial.seed);
        r.number("slope", c.initial.slope);
        r.finish();
    }
    if (const json* v = top.find("diagnostics")) c.diagnostics = DiagnosticsSpec::from_json(*v);
    if (const json* v = top.find("ensemble")) {
        Reader r(*v, "ensemble");
        r.integer("paths", c.ensemble.paths);
        r.integer("seed", c.ensemble.seed);
        r.integer("workers", c.ensemble.workers);
        r.finish();
    }
    if (const json* v = top.find("output")) {
        Reader r(*v, "output");
        r.string("directory", c.output.directory);
        r.integer("stride", c.output.stride);
        r.boolean("snapshots", c.output.snapshots);
        r.boolean("csv", c.output.csv);
        r.finish();
    }
    top.finish();
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return from_json(j);
}

json ExperimentConfig::to_json() const {
    return json{
        {"schema_version", schema_version},
        {"run",
         {{"nu", run.nu},
          {"epsilon", run.epsilon},
          {"dt", run.dt},
          {"T", run.T},
          {"M", run.grid.modes_per_axis()},
          {"dealias_cutoff", run.grid.dealias_cutoff()},
          {"scheme", to_string(run.scheme)},
          {"mollifier", to_string(run.mollifier)}}},
        {"noise",
         {{"kind", to_string(noise.kind)},
          {"amplitude", noise.amplitude},
          {"decay", noise.decay},
          {"terms", noise.terms},
          {"max_k", noise.max_k}}},
        {"initial",
         {{"kind", to_string(initial.kind)},
          {"amplitude", initial.amplitude},
          {"wavenumber", initial.wavenumber},
          {"seed", initial.seed},
          {"slope", initial.slope}}},
        {"diagnostics", diagnostics.to_json()},
        {"ensemble", {{"paths", ensemble.paths}, {"seed", ensemble.seed}, {"workers", ensemble.workers}}},
        {"output",
         {{"directory", output.directory},
          {"stride", output.stride},
          {"snapshots", output.snapshots},
          {"csv", output.csv}}},
    };
}

void ExperimentConfig::validate() const {
    if (schema_version != config_schema_version) fail("schema_version", "unsupported version");
    checked("run", [&] { path_params(0).validate(); });
    checked("noise", [&] { noise_model(); });
    if (initial.kind == InitialKind::shear && initial.wavenumber < 1) fail("initial.wavenumber", "must be >= 1");
    if (initial.kind == InitialKind::random && !(initial.amplitude >= 0.0)) fail("initial.amplitude", "must be >= 0");

    const auto& d = diagnostics;
    if ((d.energy || d.dissipation) && d.test_functions.empty())
        fail("diagnostics.test_functions", "energy and dissipation ledgers need at least one test function");
    std::set<std::string> names;
    for (std::size_t i = 0; i < d.test_functions.size(); ++i) {
        const std::string path = "diagnostics.test_functions[" + std::to_string(i) + "]";
        const auto& s = d.test_functions[i];
        if (s.name.empty()) fail(path + ".name", "must not be empty");
        if (s.name.find_first_of("/\\ ,") != std::string::npos) fail(path + ".name", "must be a plain identifier");
        if (!names.insert(s.name).second) fail(path + ".name", "duplicate name '" + s.name + "'");
        if (s.power < 0 || s.power > 8) fail(path + ".power", "must be in [0, 8]");
        checked(path, [&] { s.build(run.grid); });
    }
    if (d.dissipation) {
        if (!d.energy) fail("diagnostics.dissipation", "needs the energy ledger");
        checked("diagnostics.dr", [&] { d.dr_config(run.grid).validate(run.grid); });
    }
    checked("diagnostics.delta", [&] { HFunction{d.delta}; });
    if (!(d.s_fraction >= 0.0 && d.s_fraction <= 1.0)) fail("diagnostics.s_fraction", "must be in [0, 1]");

    if (ensemble.paths < 1) fail("ensemble.paths", "must be >= 1");
    if (ensemble.workers < 1) fail("ensemble.workers", "must be >= 1");
    if (output.directory.empty()) fail("output.directory", "must not be empty");
    if (output.stride < 1) fail("output.stride", "must be >= 1");
}

std::string ExperimentConfig::hash() const {
    // Output location and worker count do not change any numeric result.
    json j = to_json();
    j["output"].erase("directory");
    j["ensemble"].erase("workers");
    const std::string s = j.dump();
    const uLong crc = crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(s.data()), static_cast<uInt>(s.size()));
    char buf[9];
    std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
    return buf;
}

RunParams ExperimentConfig::path_params(std::uint32_t path_id) const {
    RunParams p = run;
    p.seed = ensemble.seed;
    p.path_id = path_id;
    p.stride = 1;
    return p;
}

NoiseModel ExperimentConfig::noise_model() const { return NoiseModel(noise, run.grid); }

std::string code_version() { return LSNS_VERSION; }

}  // namespace lsns
