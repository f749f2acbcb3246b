#include "bcd/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace bcd {

std::string format_g17(double v) {
    if (std::isnan(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

double parse_field(const std::string& s) {
    if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw IoError("malformed numeric field '" + s + "'");
    return v;
}

void append_le_double(std::string& out, double v) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

double read_le_double(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(p[b]) << (8 * b);
    return std::bit_cast<double>(bits);
}

}  // namespace

std::string snapshot_to_bytes(const ParamStore& theta) {
    std::string out;
    out += "BCDSNAP 1\n";
    out += "layout " + std::to_string(theta.layout().size()) + "\n";
    for (const auto& spec : theta.layout())
        out += spec.name + " " + std::to_string(spec.rows) + " " + std::to_string(spec.cols) +
               " " + std::to_string(spec.offset) + "\n";
    out += "values " + std::to_string(theta.dim()) + "\n";
    out += "END\n";
    out.reserve(out.size() + 8 * theta.dim());
    for (double v : theta.values()) append_le_double(out, v);
    return out;
}

ParamStore snapshot_from_bytes(std::string_view bytes) {
    std::size_t pos = 0;
    auto next_line = [&]() -> std::string {
        const std::size_t nl = bytes.find('\n', pos);
        if (nl == std::string_view::npos) throw IoError("snapshot header truncated");
        std::string line(bytes.substr(pos, nl - pos));
        pos = nl + 1;
        return line;
    };
    if (next_line() != "BCDSNAP 1") throw IoError("not a snapshot file");
    std::size_t count = 0;
    {
        std::istringstream in(next_line());
        std::string tag;
        in >> tag >> count;
        if (tag != "layout" || in.fail()) throw IoError("snapshot layout header malformed");
    }
    std::vector<MatrixSpec> layout(count);
    for (auto& spec : layout) {
        std::istringstream in(next_line());
        in >> spec.name >> spec.rows >> spec.cols >> spec.offset;
        if (in.fail()) throw IoError("snapshot layout entry malformed");
    }
    std::size_t d = 0;
    {
        std::istringstream in(next_line());
        std::string tag;
        in >> tag >> d;
        if (tag != "values" || in.fail()) throw IoError("snapshot value header malformed");
    }
    if (next_line() != "END") throw IoError("snapshot header missing END");
    if (bytes.size() - pos != 8 * d) throw IoError("snapshot payload size mismatch");
    ParamStore theta(std::move(layout));
    if (theta.dim() != d) throw IoError("snapshot layout does not match value count");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + pos;
    for (std::size_t i = 0; i < d; ++i) theta[i] = read_le_double(p + 8 * i);
    return theta;
}

void write_snapshot(const std::string& path, const ParamStore& theta) {
    write_text_file(path, snapshot_to_bytes(theta));
}

ParamStore read_snapshot(const std::string& path) {
    return snapshot_from_bytes(read_text_file(path));
}

std::string trace_to_csv(const TrainTrace& trace) {
    std::string out = "t,i,k,loss,block_grad_norm,full_grad_norm,h_min,h_max,wall_ms\n";
    for (const auto& r : trace.rows) {
        out += std::to_string(r.t) + "," + std::to_string(r.i) + "," + std::to_string(r.k) + "," +
               format_g17(r.loss) + "," + format_g17(r.block_grad_norm) + "," +
               format_g17(r.full_grad_norm) + "," + format_g17(r.h_min) + "," +
               format_g17(r.h_max) + "," + format_g17(r.wall_ms) + "\n";
    }
    return out;
}

TrainTrace trace_from_csv(std::string_view csv) {
    TrainTrace trace;
    std::size_t pos = 0;
    bool header = true;
    while (pos < csv.size()) {
        const std::size_t nl = std::min(csv.find('\n', pos), csv.size());
        const std::string line(csv.substr(pos, nl - pos));
        pos = nl + 1;
        if (line.empty()) continue;
        if (header) {
            if (line != "t,i,k,loss,block_grad_norm,full_grad_norm,h_min,h_max,wall_ms")
                throw IoError("unexpected trace header");
            header = false;
            continue;
        }
        std::vector<std::string> fields;
        std::size_t f = 0;
        while (f <= line.size()) {
            const std::size_t comma = std::min(line.find(',', f), line.size());
            fields.emplace_back(line.substr(f, comma - f));
            f = comma + 1;
            if (comma == line.size()) break;
        }
        if (fields.size() != 9) throw IoError("trace row has wrong field count");
        TraceRow row;
        row.t = static_cast<int>(std::strtol(fields[0].c_str(), nullptr, 10));
        row.i = static_cast<int>(std::strtol(fields[1].c_str(), nullptr, 10));
        row.k = static_cast<int>(std::strtol(fields[2].c_str(), nullptr, 10));
        row.loss = parse_field(fields[3]);
        row.block_grad_norm = parse_field(fields[4]);
        row.full_grad_norm = parse_field(fields[5]);
        row.h_min = parse_field(fields[6]);
        row.h_max = parse_field(fields[7]);
        row.wall_ms = parse_field(fields[8]);
        trace.rows.push_back(row);
    }
    if (header) throw IoError("trace file is empty");
    return trace;
}

namespace {

using nlohmann::json;

json number_or_null(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

double number_from(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null())
        return std::numeric_limits<double>::quiet_NaN();
    return j.at(key).get<double>();
}

}  // namespace

std::string summary_to_json(const RunSummary& s) {
    json j;
    j["name"] = s.name;
    j["objective"] = s.objective;
    j["rule"] = s.rule;
    j["mode"] = s.mode;
    j["schedule"] = s.schedule;
    j["ordering"] = s.ordering;
    j["termination"] = s.termination;
    j["d"] = s.d;
    j["n"] = s.n;
    j["D"] = s.D;
    j["K"] = s.K;
    j["T"] = s.T;
    j["B"] = s.B;
    j["epochs_run"] = s.epochs_run;
    j["alpha"] = s.alpha;
    j["beta1"] = s.beta1;
    j["beta2"] = s.beta2;
    j["lambda"] = s.lambda;
    j["weight_decay"] = s.weight_decay;
    j["delta"] = s.delta;
    j["init_scale"] = s.init_scale;
    j["seed"] = s.seed;
    j["initial_loss"] = number_or_null(s.initial_loss);
    j["initial_grad_norm"] = number_or_null(s.initial_grad_norm);
    j["final_loss"] = number_or_null(s.final_loss);
    j["final_grad_norm"] = number_or_null(s.final_grad_norm);
    j["L"] = number_or_null(s.L);
    j["L_bar"] = number_or_null(s.L_bar);
    j["L_min"] = number_or_null(s.L_min);
    return j.dump(2) + "\n";
}

RunSummary summary_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("summary JSON malformed: ") + e.what());
    }
    RunSummary s;
    s.name = j.value("name", s.name);
    s.objective = j.value("objective", s.objective);
    s.rule = j.value("rule", s.rule);
    s.mode = j.value("mode", s.mode);
    s.schedule = j.value("schedule", s.schedule);
    s.ordering = j.value("ordering", s.ordering);
    s.termination = j.value("termination", s.termination);
    s.d = j.value("d", 0);
    s.n = j.value("n", 0);
    s.D = j.value("D", 0);
    s.K = j.value("K", 0);
    s.T = j.value("T", 0);
    s.B = j.value("B", 0);
    s.epochs_run = j.value("epochs_run", 0);
    s.alpha = j.value("alpha", 0.0);
    s.beta1 = j.value("beta1", 0.0);
    s.beta2 = j.value("beta2", 0.0);
    s.lambda = j.value("lambda", 0.0);
    s.weight_decay = j.value("weight_decay", 0.0);
    s.delta = j.value("delta", 0.0);
    s.init_scale = j.value("init_scale", 1.0);
    s.seed = j.value("seed", std::uint64_t{0});
    s.initial_loss = number_from(j, "initial_loss");
    s.initial_grad_norm = number_from(j, "initial_grad_norm");
    s.final_loss = number_from(j, "final_loss");
    s.final_grad_norm = number_from(j, "final_grad_norm");
    s.L = number_from(j, "L");
    s.L_bar = number_from(j, "L_bar");
    s.L_min = number_from(j, "L_min");
    return s;
}

void write_text_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("short write to '" + path + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read error on '" + path + "'");
    return std::move(ss).str();
}

}  // namespace bcd
