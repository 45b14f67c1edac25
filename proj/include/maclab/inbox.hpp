#pragma once

#include <deque>
#include <stdexcept>
#include <vector>

#include "maclab/graph.hpp"

namespace maclab {

// What an agent broadcasts at the end of a round: its id, the round, the arm
// it pulled, the loss it observed, and its action distribution.
struct AgentMessage {
    int sender = -1;
    long long round = -1;
    int arm = -1;
    double loss = 0.0;
    std::vector<double> distribution;
};

// Per-agent FIFO delivering each message exactly edge_delay rounds after it
// was sent, in send order. Owned by a single simulation.
class DelayedInbox {
public:
    explicit DelayedInbox(const CommGraph& g) : graph_(&g), queues_(g.n_agents()) {}

    void send(int from, int to, long long round, AgentMessage msg) {
        if (!graph_->has_edge(from, to))
            throw std::invalid_argument("delayed_send: (from, to) is not an edge");
        queues_[to].push_back({round + graph_->edge_delay(), std::move(msg)});
        ++sent_;
    }

    // Every message addressed to `agent` that becomes readable exactly at
    // `round`, i.e. was sent at round - edge_delay. Empty when round <= delay
    // and nothing was sent at round zero or earlier.
    std::vector<AgentMessage> receive(int agent, long long round) {
        std::vector<AgentMessage> out;
        auto& q = queues_[agent];
        while (!q.empty() && q.front().deliver_round <= round) {
            if (q.front().deliver_round == round) out.push_back(std::move(q.front().msg));
            ++delivered_;
            q.pop_front();
        }
        return out;
    }

    long long total_sent() const { return sent_; }
    long long total_delivered() const { return delivered_; }
    long long in_flight() const {
        long long n = 0;
        for (const auto& q : queues_) n += static_cast<long long>(q.size());
        return n;
    }

private:
    struct Entry {
        long long deliver_round;
        AgentMessage msg;
    };
    const CommGraph* graph_;
    std::vector<std::deque<Entry>> queues_;
    long long sent_ = 0;
    long long delivered_ = 0;
};

}  // namespace maclab
