#include "gather/trace.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "gather/error.hpp"

namespace gather {

namespace {

const char* kind_name(TraceEventKind k) {
    switch (k) {
        case TraceEventKind::spawn: return "spawn";
        case TraceEventKind::mask: return "mask";
        case TraceEventKind::observe: return "observe";
        case TraceEventKind::act: return "act";
        case TraceEventKind::moved: return "moved";
        case TraceEventKind::blocked: return "blocked";
        case TraceEventKind::crossed: return "crossed";
        case TraceEventKind::pebble_placed: return "pebble_placed";
        case TraceEventKind::pebble_picked: return "pebble_picked";
        case TraceEventKind::terminated: return "terminated";
        case TraceEventKind::milestone: return "milestone";
    }
    return "?";
}

TraceEventKind kind_from(const std::string& s) {
    for (int i = 0; i <= static_cast<int>(TraceEventKind::milestone); ++i) {
        auto k = static_cast<TraceEventKind>(i);
        if (s == kind_name(k)) return k;
    }
    fail(ErrorKind::MalformedTrace, "unknown event kind '" + s + "'");
}

}  // namespace

std::string format_event(const TraceEvent& ev) {
    std::ostringstream os;
    os << ev.round << '\t';
    if (ev.agent >= 0)
        os << "agent:" << ev.agent;
    else
        os << "scheduler";
    os << '\t' << kind_name(ev.kind) << '\t' << ev.a << ' ' << ev.b << ' ' << ev.c << ' '
       << ev.d << ' ' << ev.e << ' ' << ev.f;
    os << '\t';
    if (ev.edges.empty()) {
        os << '-';
    } else {
        for (std::size_t i = 0; i < ev.edges.size(); ++i) {
            if (i) os << ',';
            os << ev.edges[i];
        }
    }
    return os.str();
}

TraceEvent parse_event(const std::string& line) {
    TraceEvent ev;
    std::istringstream is(line);
    std::string entity, kind, ints, edges;
    if (!std::getline(is, entity, '\t'))
        fail(ErrorKind::MalformedTrace, "missing round field");
    try {
        ev.round = std::stol(entity);
    } catch (...) {
        fail(ErrorKind::MalformedTrace, "bad round field '" + entity + "'");
    }
    if (!std::getline(is, entity, '\t') || !std::getline(is, kind, '\t') ||
        !std::getline(is, ints, '\t') || !std::getline(is, edges, '\t'))
        fail(ErrorKind::MalformedTrace, "event line has too few fields");
    if (entity.rfind("agent:", 0) == 0) {
        try {
            ev.agent = std::stoi(entity.substr(6));
        } catch (...) {
            fail(ErrorKind::MalformedTrace, "bad agent id '" + entity + "'");
        }
    } else if (entity == "scheduler") {
        ev.agent = -1;
    } else {
        fail(ErrorKind::MalformedTrace, "unknown entity '" + entity + "'");
    }
    ev.kind = kind_from(kind);
    std::istringstream ii(ints);
    if (!(ii >> ev.a >> ev.b >> ev.c >> ev.d >> ev.e >> ev.f))
        fail(ErrorKind::MalformedTrace, "bad payload ints");
    if (edges != "-") {
        std::istringstream ie(edges);
        std::string tok;
        while (std::getline(ie, tok, ',')) {
            try {
                ev.edges.push_back(std::stoi(tok));
            } catch (...) {
                fail(ErrorKind::MalformedTrace, "bad edge id '" + tok + "'");
            }
        }
    }
    return ev;
}

void StreamSink::emit(const TraceEvent& ev) { out_ << format_event(ev) << '\n'; }

std::vector<TraceEvent> load_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::MalformedTrace, "cannot open trace file " + path);
    std::vector<TraceEvent> events;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        events.push_back(parse_event(line));
    }
    return events;
}

}  // namespace gather
