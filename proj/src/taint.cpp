#include "taintflow/taint.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <queue>
#include <sstream>

#include <json.hpp>

namespace taintflow {

void TaintConfig::validate() const {
    if (!(purity_min > 0.0 && purity_min <= 1.0)) {
        throw Error(ErrorKind::ConfigInvalid, "purity_min must be in (0,1]");
    }
    if (time_max <= 0) throw Error(ErrorKind::ConfigInvalid, "time_max must be positive");
    if (seeds.empty()) throw Error(ErrorKind::ConfigInvalid, "seed set is empty");
}

namespace {

double purity_by_index(const Ledger& ledger, TxIndex idx,
                       const std::unordered_map<TxIndex, double>& purity_map) {
    const Transaction& tx = ledger.tx(idx);
    double num = 0.0;
    double den = 0.0;
    for (const UtxoRef& in : tx.inputs) {
        const UtxoOut& utxo = ledger.tx(in.src).outputs[in.vout];
        den += static_cast<double>(utxo.value);
        auto it = purity_map.find(in.src);
        if (it != purity_map.end()) num += it->second * static_cast<double>(utxo.value);
    }
    if (den == 0.0) return 0.0;  // zero input value: the coin cannot carry taint
    return num / den;
}

}  // namespace

double purity(const Ledger& ledger, const std::string& txid,
              const std::unordered_map<std::string, double>& purity_map,
              const std::set<std::string>& seeds) {
    TxIndex idx = ledger.index_of(txid);
    if (seeds.count(txid)) return 1.0;
    const Transaction& tx = ledger.tx(idx);
    if (tx.is_coinbase) return 0.0;  // coinbase outside the seed set is untainted
    std::unordered_map<TxIndex, double> by_index;
    by_index.reserve(purity_map.size());
    for (const auto& [id, p] : purity_map) {
        if (ledger.contains(id)) by_index.emplace(ledger.index_of(id), p);
    }
    return purity_by_index(ledger, idx, by_index);
}

TaintFlow extract_flow(const Ledger& ledger, const ActorIndex& actors, const TaintConfig& config,
                       const std::string& flow_id) {
    config.validate();

    TaintFlow flow;
    flow.id = flow_id;

    std::set<TxIndex> seed_set;
    for (const std::string& txid : config.seeds) {
        if (!ledger.contains(txid)) throw Error(ErrorKind::SeedNotFound, txid);
        seed_set.insert(ledger.index_of(txid));
    }
    flow.seed_time = ledger.tx(*seed_set.begin()).time;
    for (TxIndex s : seed_set) {
        const Transaction& tx = ledger.tx(s);
        flow.seeds.push_back(tx.txid);
        flow.seed_time = std::min(flow.seed_time, tx.time);
        for (const UtxoOut& out : tx.outputs) {
            flow.source_clusters.insert(actors.cluster_of(out.address));
        }
    }
    std::sort(flow.seeds.begin(), flow.seeds.end());
    flow.month = month_index(flow.seed_time);
    const std::int64_t time_cutoff = flow.seed_time + config.time_max;

    // Min-heap on (time, txid); pop order is a topological order of the flow
    // except inside equal-timestamp cohorts, which are ordered explicitly below
    // so that a transaction is never evaluated before a same-time input source.
    struct Entry {
        std::int64_t time;
        const std::string* txid;
        TxIndex idx;
    };
    auto later = [](const Entry& a, const Entry& b) {
        if (a.time != b.time) return a.time > b.time;
        return *a.txid > *b.txid;
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(later)> queue(later);

    std::unordered_map<TxIndex, double> purity_prop;  // expanded transactions only
    std::set<TxIndex> enqueued;
    std::set<TxIndex> processed;

    auto push = [&](TxIndex idx) {
        const Transaction& tx = ledger.tx(idx);
        queue.push(Entry{tx.time, &tx.txid, idx});
    };
    for (TxIndex s : seed_set) {
        enqueued.insert(s);
        flow.node_depth[ledger.tx(s).txid] = 0;
        push(s);
    }

    auto process_one = [&](TxIndex idx) {
        if (processed.count(idx)) return;
        processed.insert(idx);
        if (!enqueued.count(idx)) return;  // never reached by taint

        const Transaction& tx = ledger.tx(idx);
        const bool is_seed = seed_set.count(idx) != 0;
        const double rho = is_seed ? 1.0 : purity_by_index(ledger, idx, purity_prop);
        flow.node_purity[tx.txid] = rho;
        flow.node_time[tx.txid] = tx.time;

        // Seeds are sources by definition and always expand; other nodes
        // dissolve on low purity or when past the time cutoff.
        const bool expand = is_seed || (rho >= config.purity_min && tx.time <= time_cutoff);
        if (!expand) {
            flow.dissolved.insert(tx.txid);
            return;
        }
        purity_prop[idx] = rho;
        flow.expansion_order.push_back(tx.txid);
        const std::uint32_t depth = flow.node_depth[tx.txid];

        for (const UtxoOut& out : tx.outputs) {
            TaintEdge edge;
            edge.src_txid = tx.txid;
            edge.address = out.address;
            edge.cluster = actors.cluster_of(out.address);
            edge.amount = out.value;
            edge.amount_flow = static_cast<double>(out.value) * rho;
            if (out.spent()) {
                const Transaction& spender = ledger.tx(out.spent_by);
                edge.dst_txid = spender.txid;
                edge.time = spender.time;
                auto [it, added] = flow.node_depth.emplace(spender.txid, depth + 1);
                if (!added) it->second = std::min(it->second, depth + 1);
                if (!enqueued.count(out.spent_by)) {
                    enqueued.insert(out.spent_by);
                    push(out.spent_by);
                }
            } else {
                edge.time = tx.time;
            }
            flow.edges.push_back(std::move(edge));
        }
    };

    while (!queue.empty()) {
        const std::int64_t t = queue.top().time;
        if (processed.count(queue.top().idx)) {
            queue.pop();
            continue;
        }

        // Drain the whole equal-time cohort.
        std::set<TxIndex> batch;
        while (!queue.empty() && queue.top().time == t) {
            if (!processed.count(queue.top().idx)) batch.insert(queue.top().idx);
            queue.pop();
        }

        if (batch.size() == 1 && [&] {
                const Transaction& tx = ledger.tx(*batch.begin());
                for (const UtxoRef& in : tx.inputs) {
                    if (ledger.tx(in.src).time == t && !processed.count(in.src)) return false;
                }
                return true;
            }()) {
            process_one(*batch.begin());
            continue;
        }

        // Forward closure of the cohort across same-time spend edges: members
        // enqueued mid-cohort are always part of it.
        std::vector<TxIndex> closure(batch.begin(), batch.end());
        std::set<TxIndex> in_closure(batch.begin(), batch.end());
        for (std::size_t i = 0; i < closure.size(); ++i) {
            for (const UtxoOut& out : ledger.tx(closure[i]).outputs) {
                if (!out.spent()) continue;
                if (ledger.tx(out.spent_by).time != t) continue;
                if (in_closure.insert(out.spent_by).second) closure.push_back(out.spent_by);
            }
        }

        // Kahn's ordering over intra-cohort dependencies, smallest txid first.
        std::map<TxIndex, std::vector<TxIndex>> children;
        std::map<TxIndex, int> indegree;
        for (TxIndex u : in_closure) indegree.emplace(u, 0);
        for (TxIndex u : in_closure) {
            for (const UtxoOut& out : ledger.tx(u).outputs) {
                if (out.spent() && in_closure.count(out.spent_by)) {
                    children[u].push_back(out.spent_by);
                    ++indegree[out.spent_by];
                }
            }
        }
        auto by_txid = [&](TxIndex a, TxIndex b) { return ledger.tx(a).txid > ledger.tx(b).txid; };
        std::priority_queue<TxIndex, std::vector<TxIndex>, decltype(by_txid)> ready(by_txid);
        for (const auto& [u, deg] : indegree) {
            if (deg == 0) ready.push(u);
        }
        std::size_t handled = 0;
        while (!ready.empty()) {
            TxIndex u = ready.top();
            ready.pop();
            ++handled;
            process_one(u);
            for (TxIndex v : children[u]) {
                if (--indegree[v] == 0) ready.push(v);
            }
        }
        if (handled != in_closure.size()) {
            // Same-time reference cycle; representable in the file format even
            // though unconstructible on a real chain. Deterministic fallback.
            for (const auto& [u, deg] : indegree) {
                if (deg > 0) process_one(u);
            }
        }
    }

    return flow;
}

FlowStats flow_stats(const TaintFlow& flow) {
    FlowStats st;
    std::set<std::string> txs(flow.seeds.begin(), flow.seeds.end());
    std::set<std::string> clusters;
    for (const TaintEdge& e : flow.edges) {
        txs.insert(e.src_txid);
        if (e.spent()) {
            txs.insert(e.dst_txid);
        } else {
            ++st.unspent_edges;
        }
        clusters.insert(e.cluster);
    }
    st.transactions = txs.size();
    st.distinct_clusters = clusters.size();
    st.edges = flow.edges.size();
    st.dissolved_leaves = flow.dissolved.size();
    for (const auto& [txid, depth] : flow.node_depth) {
        if (txs.count(txid)) st.max_depth = std::max(st.max_depth, depth);
    }
    for (const TaintEdge& e : flow.edges) {
        if (std::find(flow.seeds.begin(), flow.seeds.end(), e.src_txid) != flow.seeds.end()) {
            st.total_seed_value += static_cast<double>(e.amount);
        }
    }
    return st;
}

std::set<std::string> flow_cluster_set(const TaintFlow& flow) {
    std::set<std::string> clusters;
    for (const TaintEdge& e : flow.edges) clusters.insert(e.cluster);
    return clusters;
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void TaintFlow::write_tsv(const std::string& tsv_path) const {
    std::ostringstream out;
    out << "src_txid\tdst_txid\taddress\tcluster\tamount_sat\tamount_flow\ttime\tpurity_src\n";
    for (const TaintEdge& e : edges) {
        auto it = node_purity.find(e.src_txid);
        out << e.src_txid << '\t' << e.dst_txid << '\t' << e.address << '\t' << e.cluster << '\t'
            << e.amount << '\t' << format_double(e.amount_flow) << '\t' << e.time << '\t'
            << format_double(it == node_purity.end() ? 0.0 : it->second) << '\n';
    }
    write_text_file(tsv_path, out.str());

    nlohmann::json meta;
    meta["flow_id"] = id;
    meta["seed_time"] = seed_time;
    meta["month"] = month;
    nlohmann::json seed_list = nlohmann::json::array();
    for (const std::string& s : seeds) {
        seed_list.push_back({{"txid", s}, {"time", node_time.count(s) ? node_time.at(s) : seed_time}});
    }
    meta["seeds"] = std::move(seed_list);
    meta["source_clusters"] = std::vector<std::string>(source_clusters.begin(), source_clusters.end());
    meta["dissolved"] = std::vector<std::string>(dissolved.begin(), dissolved.end());
    // Purities of nodes that never emit an edge row (dissolved or output-less).
    std::set<std::string> srcs;
    for (const TaintEdge& e : edges) srcs.insert(e.src_txid);
    nlohmann::json leaf_purity = nlohmann::json::object();
    for (const auto& [txid, p] : std::map<std::string, double>(node_purity.begin(), node_purity.end())) {
        if (!srcs.count(txid)) leaf_purity[txid] = p;
    }
    meta["leaf_purity"] = std::move(leaf_purity);
    write_text_file(tsv_path + ".meta.json", meta.dump(2) + "\n");
}

TaintFlow TaintFlow::read_tsv(const std::string& tsv_path) {
    TaintFlow flow;

    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(read_text_file(tsv_path + ".meta.json"));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, tsv_path + ".meta.json: " + e.what());
    }
    flow.id = meta.at("flow_id").get<std::string>();
    flow.seed_time = meta.at("seed_time").get<std::int64_t>();
    flow.month = meta.at("month").get<std::int64_t>();
    for (const auto& s : meta.at("seeds")) {
        const std::string txid = s.at("txid").get<std::string>();
        flow.seeds.push_back(txid);
        flow.node_time[txid] = s.at("time").get<std::int64_t>();
    }
    for (const auto& c : meta.at("source_clusters")) flow.source_clusters.insert(c.get<std::string>());
    for (const auto& d : meta.at("dissolved")) flow.dissolved.insert(d.get<std::string>());
    for (const auto& [txid, p] : meta.at("leaf_purity").items()) flow.node_purity[txid] = p.get<double>();

    std::ifstream in(tsv_path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + tsv_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 || line.empty()) continue;  // header
        std::istringstream fields(line);
        TaintEdge e;
        std::string amount, amount_flow, time, purity_src;
        if (!std::getline(fields, e.src_txid, '\t') || !std::getline(fields, e.dst_txid, '\t') ||
            !std::getline(fields, e.address, '\t') || !std::getline(fields, e.cluster, '\t') ||
            !std::getline(fields, amount, '\t') || !std::getline(fields, amount_flow, '\t') ||
            !std::getline(fields, time, '\t') || !std::getline(fields, purity_src, '\t')) {
            throw Error(ErrorKind::ParseError, tsv_path + " line " + std::to_string(line_no));
        }
        e.amount = std::stoll(amount);
        e.amount_flow = std::stod(amount_flow);
        e.time = std::stoll(time);
        flow.node_purity[e.src_txid] = std::stod(purity_src);
        if (e.spent()) flow.node_time[e.dst_txid] = e.time;
        if (std::find(flow.seeds.begin(), flow.seeds.end(), e.src_txid) == flow.seeds.end() &&
            flow.node_time.count(e.src_txid) == 0) {
            flow.node_time[e.src_txid] = e.time;  // unspent edge carries src time
        }
        flow.edges.push_back(std::move(e));
    }

    // Expansion order and depths are recomputed: edge rows are written in
    // expansion order, and depth is the hop count from the seed set.
    std::set<std::string> seen;
    for (const TaintEdge& e : flow.edges) {
        if (seen.insert(e.src_txid).second) flow.expansion_order.push_back(e.src_txid);
    }
    for (const std::string& s : flow.seeds) flow.node_depth[s] = 0;
    std::multimap<std::string, const TaintEdge*> out_edges;
    for (const TaintEdge& e : flow.edges) {
        if (e.spent()) out_edges.emplace(e.src_txid, &e);
    }
    std::deque<std::string> frontier(flow.seeds.begin(), flow.seeds.end());
    while (!frontier.empty()) {
        std::string u = frontier.front();
        frontier.pop_front();
        const std::uint32_t d = flow.node_depth[u];
        auto [lo, hi] = out_edges.equal_range(u);
        for (auto it = lo; it != hi; ++it) {
            const std::string& v = it->second->dst_txid;
            auto [dit, added] = flow.node_depth.emplace(v, d + 1);
            if (added) {
                frontier.push_back(v);
            } else if (dit->second > d + 1) {
                dit->second = d + 1;
                frontier.push_back(v);
            }
        }
    }
    return flow;
}

}  // namespace taintflow
