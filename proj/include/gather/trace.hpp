#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gather/agent.hpp"
#include "gather/graph.hpp"

namespace gather {

enum class TraceEventKind : std::uint8_t {
    spawn,
    mask,
    observe,
    act,
    moved,
    blocked,
    crossed,
    pebble_placed,
    pebble_picked,
    terminated,
    milestone,
};

// One serialized observable fact per round per entity.  Field meaning depends
// on the kind; the text form is stable and byte-exact across replays.
struct TraceEvent {
    long round = 0;
    int agent = -1;  // -1 for scheduler events
    TraceEventKind kind = TraceEventKind::mask;
    int a = -1, b = -1, c = -1, d = -1, e = -1, f = -1;
    std::vector<EdgeId> edges;  // mask: removed edge ids
};

std::string format_event(const TraceEvent& ev);
TraceEvent parse_event(const std::string& line);  // throws MalformedTrace

class TraceSink {
public:
    virtual ~TraceSink() = default;
    virtual void emit(const TraceEvent& ev) = 0;
};

class VectorSink : public TraceSink {
public:
    void emit(const TraceEvent& ev) override { events.push_back(ev); }
    std::vector<TraceEvent> events;
};

class StreamSink : public TraceSink {
public:
    explicit StreamSink(std::ostream& out) : out_(out) {}
    void emit(const TraceEvent& ev) override;

private:
    std::ostream& out_;
};

std::vector<TraceEvent> load_trace_file(const std::string& path);

}  // namespace gather
