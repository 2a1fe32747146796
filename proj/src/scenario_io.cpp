#include "gridform/scenario_io.hpp"

#include <charconv>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "gridform/errors.hpp"

namespace gridform {

namespace {

std::string fmt_exact(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v); // shortest round-trip form
    return std::string(buf, res.ptr);
}

std::string fmt9(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

double parse_number(const std::string& tok, int line_no) {
    const char* begin = tok.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end != begin + tok.size() || tok.empty())
        throw validation_error("line " + std::to_string(line_no) + ": not a number: '" + tok +
                               "'");
    return v;
}

// "P=<num>" / "Q=<num>" pairs on init/event load lines
double parse_kv(const std::string& tok, const char* key, int line_no) {
    const std::string prefix = std::string(key) + "=";
    if (tok.rfind(prefix, 0) != 0)
        throw validation_error("line " + std::to_string(line_no) + ": expected " + prefix +
                               "<number>, got '" + tok + "'");
    return parse_number(tok.substr(prefix.size()), line_no);
}

constexpr const char* kParamKeys[] = {"L_f",    "C_f",   "f_sw",     "f_grid",
                                      "t_end",  "dt",    "lambda",   "bound",
                                      "t_sample", "t_delay", "max_hold"};

}  // namespace

ParsedScenario parse_scenario(const std::string& text) {
    std::map<std::string, double> params;
    bool have_vdc = false, have_amp = false, have_load = false;
    double vdc = 0.0, amp = 0.0, P = 0.0, Q = 0.0;
    std::vector<Event> events;
    std::vector<std::size_t> event_order;

    std::istringstream is(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        if (auto pos = raw.find('#'); pos != std::string::npos) raw.erase(pos);
        const std::vector<std::string> tok = tokenize(raw);
        if (tok.empty()) continue;

        if (tok[0] == "param") {
            if (tok.size() != 3)
                throw validation_error("line " + std::to_string(line_no) +
                                       ": expected 'param <name> <number>'");
            bool known = false;
            for (const char* k : kParamKeys) known = known || tok[1] == k;
            if (!known)
                throw validation_error("line " + std::to_string(line_no) +
                                       ": unknown parameter '" + tok[1] + "'");
            if (params.count(tok[1]))
                throw validation_error("line " + std::to_string(line_no) +
                                       ": duplicate parameter '" + tok[1] + "'");
            params[tok[1]] = parse_number(tok[2], line_no);
        } else if (tok[0] == "init") {
            if (tok.size() >= 3 && tok[1] == "vdc") {
                if (tok.size() != 3)
                    throw validation_error("line " + std::to_string(line_no) +
                                           ": expected 'init vdc <V>'");
                vdc = parse_number(tok[2], line_no);
                have_vdc = true;
            } else if (tok.size() >= 3 && tok[1] == "vref_amp") {
                if (tok.size() != 3)
                    throw validation_error("line " + std::to_string(line_no) +
                                           ": expected 'init vref_amp <V>'");
                amp = parse_number(tok[2], line_no);
                have_amp = true;
            } else if (tok.size() >= 2 && tok[1] == "load") {
                if (tok.size() != 4)
                    throw validation_error("line " + std::to_string(line_no) +
                                           ": expected 'init load P=<W> Q=<VAr>'");
                P = parse_kv(tok[2], "P", line_no);
                Q = parse_kv(tok[3], "Q", line_no);
                have_load = true;
            } else {
                throw validation_error("line " + std::to_string(line_no) +
                                       ": unknown init target");
            }
        } else if (tok[0] == "event") {
            if (tok.size() < 3)
                throw validation_error("line " + std::to_string(line_no) +
                                       ": expected 'event <t> <action> ...'");
            Event ev;
            ev.t = parse_number(tok[1], line_no);
            if (tok[2] == "set_vdc" || tok[2] == "set_vref_amp") {
                if (tok.size() != 4)
                    throw validation_error("line " + std::to_string(line_no) + ": expected '" +
                                           tok[2] + " <V>'");
                ev.kind = tok[2] == "set_vdc" ? Event::Kind::set_vdc : Event::Kind::set_vref_amp;
                ev.a = parse_number(tok[3], line_no);
            } else if (tok[2] == "set_load") {
                if (tok.size() != 5)
                    throw validation_error("line " + std::to_string(line_no) +
                                           ": expected 'set_load P=<W> Q=<VAr>'");
                ev.kind = Event::Kind::set_load;
                ev.a = parse_kv(tok[3], "P", line_no);
                ev.b = parse_kv(tok[4], "Q", line_no);
            } else {
                throw validation_error("line " + std::to_string(line_no) +
                                       ": unknown event action '" + tok[2] + "'");
            }
            events.push_back(ev);
            event_order.push_back(event_order.size());
        } else {
            throw validation_error("line " + std::to_string(line_no) + ": unknown directive '" +
                                   tok[0] + "'");
        }
    }

    ParsedScenario out;
    Scenario& scn = out.scenario;
    auto take = [&](const char* key, double fallback) {
        auto it = params.find(key);
        if (it != params.end()) return it->second;
        out.defaulted.push_back(key);
        return fallback;
    };
    const double L_f = take("L_f", scn.params.L_f);
    const double C_f = take("C_f", scn.params.C_f);
    const double f_sw = take("f_sw", scn.params.f_sw);
    scn.params = make_params(L_f, C_f, f_sw);
    scn.f_grid = take("f_grid", scn.f_grid);
    scn.t_end = take("t_end", scn.t_end);
    scn.dt = take("dt", scn.dt);
    scn.controller.lambda = take("lambda", 0.0); // 0 = derive from f_sw below
    scn.controller.Bound = take("bound", 0.0);   // 0 = derive from operating point
    scn.controller.T_sample = take("t_sample", scn.controller.T_sample);
    scn.controller.T_delay = take("t_delay", scn.controller.T_delay);
    scn.controller.max_hold = take("max_hold", scn.controller.max_hold);
    if (have_vdc)
        scn.v_dc0 = vdc;
    else
        out.defaulted.push_back("vdc");
    if (have_amp)
        scn.vref_amp0 = amp;
    else
        out.defaulted.push_back("vref_amp");
    if (have_load) {
        scn.P0 = P;
        scn.Q0 = Q;
    } else {
        out.defaulted.push_back("load");
    }

    std::stable_sort(events.begin(), events.end(),
                     [](const Event& a, const Event& b) { return a.t < b.t; });
    scn.events = std::move(events);

    validate_scenario(scn);
    resolve_controller_defaults(scn);
    validate_config(scn.controller);
    return out;
}

std::string serialize_scenario(const Scenario& scn) {
    std::ostringstream os;
    os << "param L_f " << fmt_exact(scn.params.L_f) << '\n';
    os << "param C_f " << fmt_exact(scn.params.C_f) << '\n';
    os << "param f_sw " << fmt_exact(scn.params.f_sw) << '\n';
    os << "param f_grid " << fmt_exact(scn.f_grid) << '\n';
    os << "param t_end " << fmt_exact(scn.t_end) << '\n';
    os << "param dt " << fmt_exact(scn.dt) << '\n';
    os << "param lambda " << fmt_exact(scn.controller.lambda) << '\n';
    os << "param bound " << fmt_exact(scn.controller.Bound) << '\n';
    os << "param t_sample " << fmt_exact(scn.controller.T_sample) << '\n';
    os << "param t_delay " << fmt_exact(scn.controller.T_delay) << '\n';
    os << "param max_hold " << fmt_exact(scn.controller.max_hold) << '\n';
    os << "init vdc " << fmt_exact(scn.v_dc0) << '\n';
    os << "init vref_amp " << fmt_exact(scn.vref_amp0) << '\n';
    os << "init load P=" << fmt_exact(scn.P0) << " Q=" << fmt_exact(scn.Q0) << '\n';
    for (const Event& ev : scn.events) {
        os << "event " << fmt_exact(ev.t) << ' ';
        switch (ev.kind) {
            case Event::Kind::set_vdc:
                os << "set_vdc " << fmt_exact(ev.a);
                break;
            case Event::Kind::set_vref_amp:
                os << "set_vref_amp " << fmt_exact(ev.a);
                break;
            case Event::Kind::set_load:
                os << "set_load P=" << fmt_exact(ev.a) << " Q=" << fmt_exact(ev.b);
                break;
        }
        os << '\n';
    }
    return os.str();
}

std::string timeseries_csv(const TimeSeries& series) {
    std::string out = "t,x_d,u_o,i_L,i_o,v_dc,T,s,margin,violated\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        out += fmt9(series.t[i]);
        out += ',';
        out += fmt9(series.x_d[i]);
        out += ',';
        out += fmt9(series.u_o[i]);
        out += ',';
        out += fmt9(series.i_L[i]);
        out += ',';
        out += fmt9(series.i_o[i]);
        out += ',';
        out += fmt9(series.v_dc[i]);
        out += ',';
        out += fmt9(series.T[i]);
        out += ',';
        out += fmt9(series.s[i]);
        out += ',';
        out += fmt9(series.margin[i]);
        out += ',';
        out += series.violated[i] ? '1' : '0';
        out += '\n';
    }
    return out;
}

void write_timeseries(const TimeSeries& series, const std::string& path) {
    write_file(path, timeseries_csv(series));
}

std::string manifest_text(const Scenario& scn, const ControllerConfig& cfg, const Metrics& m,
                          const std::string& input_digest) {
    std::ostringstream os;
    os << "tool_version = " << kToolVersion << '\n';
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
    os << "timestamp = " << stamp << '\n';
    os << "input_digest = " << input_digest << '\n';
    os << "param.L_f = " << fmt_exact(scn.params.L_f) << '\n';
    os << "param.C_f = " << fmt_exact(scn.params.C_f) << '\n';
    os << "param.f_sw = " << fmt_exact(scn.params.f_sw) << '\n';
    os << "param.a = " << fmt_exact(scn.params.a) << '\n';
    os << "param.f_grid = " << fmt_exact(scn.f_grid) << '\n';
    os << "param.t_end = " << fmt_exact(scn.t_end) << '\n';
    os << "param.dt = " << fmt_exact(scn.dt) << '\n';
    os << "param.lambda = " << fmt_exact(cfg.lambda) << '\n';
    os << "param.bound = " << fmt_exact(cfg.Bound) << '\n';
    os << "param.t_sample = " << fmt_exact(cfg.T_sample) << '\n';
    os << "param.t_delay = " << fmt_exact(cfg.T_delay) << '\n';
    os << "param.max_hold = " << fmt_exact(cfg.max_hold) << '\n';
    os << "init.vdc = " << fmt_exact(scn.v_dc0) << '\n';
    os << "init.vref_amp = " << fmt_exact(scn.vref_amp0) << '\n';
    os << "init.load = P=" << fmt_exact(scn.P0) << " Q=" << fmt_exact(scn.Q0) << '\n';
    os << "events = " << scn.events.size() << '\n';
    for (std::size_t i = 0; i < scn.events.size(); ++i) {
        const Event& ev = scn.events[i];
        os << "event." << i + 1 << " = " << fmt_exact(ev.t) << ' ';
        switch (ev.kind) {
            case Event::Kind::set_vdc:
                os << "set_vdc " << fmt_exact(ev.a);
                break;
            case Event::Kind::set_vref_amp:
                os << "set_vref_amp " << fmt_exact(ev.a);
                break;
            case Event::Kind::set_load:
                os << "set_load P=" << fmt_exact(ev.a) << " Q=" << fmt_exact(ev.b);
                break;
        }
        os << '\n';
    }
    os << "metrics.segments = " << m.segments.size() << '\n';
    for (std::size_t i = 0; i < m.segments.size(); ++i) {
        const SegmentMetrics& s = m.segments[i];
        os << "metrics.segment." << i + 1 << " = t_start=" << fmt9(s.t_start)
           << " t_end=" << fmt9(s.t_end) << " rms_error=" << fmt9(s.rms_error)
           << " peak_error=" << fmt9(s.peak_error) << " mean_fsw=" << fmt9(s.mean_fsw) << '\n';
    }
    os << "metrics.intervals = " << m.intervals.size() << '\n';
    for (std::size_t i = 0; i < m.intervals.size(); ++i)
        os << "metrics.interval." << i + 1 << " = " << fmt9(m.intervals[i].first) << ' '
           << fmt9(m.intervals[i].second) << '\n';
    return os.str();
}

void write_manifest(const Scenario& scn, const ControllerConfig& cfg, const Metrics& m,
                    const std::string& input_digest, const std::string& path) {
    write_file(path, manifest_text(scn, cfg, m, input_digest));
}

std::string scenario_text_from_manifest(const std::string& manifest) {
    std::ostringstream os;
    std::istringstream is(manifest);
    std::string line;
    while (std::getline(is, line)) {
        auto eq = line.find(" = ");
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 3);
        if (key.rfind("param.", 0) == 0) {
            const std::string name = key.substr(6);
            if (name == "a") continue; // derived, not a scenario key
            os << "param " << name << ' ' << value << '\n';
        } else if (key == "init.vdc") {
            os << "init vdc " << value << '\n';
        } else if (key == "init.vref_amp") {
            os << "init vref_amp " << value << '\n';
        } else if (key == "init.load") {
            os << "init load " << value << '\n';
        } else if (key.rfind("event.", 0) == 0) {
            os << "event " << value << '\n';
        }
    }
    return os.str();
}

std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    if (in.bad()) throw validation_error("read failure on " + path);
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw validation_error("cannot open " + path + " for writing");
    out << content;
    out.flush();
    if (!out) throw validation_error("write failure on " + path);
}

}  // namespace gridform
