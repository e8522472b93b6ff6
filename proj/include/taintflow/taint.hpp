#pragma once

#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "taintflow/actors.hpp"
#include "taintflow/ledger.hpp"

namespace taintflow {

struct TaintConfig {
    double purity_min = 0.001;
    std::int64_t time_max = 365ll * 86400;  // seconds past the earliest seed
    std::vector<std::string> seeds;

    void validate() const;
};

struct TaintEdge {
    std::string src_txid;
    std::string dst_txid;  // empty while the UTXO is unspent at ledger end
    std::string address;
    std::string cluster;
    Satoshi amount = 0;
    double amount_flow = 0.0;  // tainted portion, satoshi-valued
    std::int64_t time = 0;     // time of dst; of src for unspent edges

    bool spent() const { return !dst_txid.empty(); }
};

struct TaintFlow {
    std::string id;
    std::vector<std::string> seeds;
    std::set<std::string> source_clusters;  // clusters paid by the seed outputs
    std::int64_t seed_time = 0;             // earliest seed time
    std::int64_t month = 0;                 // calendar month index of seed_time

    std::vector<TaintEdge> edges;  // in expansion order
    std::unordered_map<std::string, double> node_purity;
    std::unordered_map<std::string, std::uint32_t> node_depth;
    std::unordered_map<std::string, std::int64_t> node_time;
    std::vector<std::string> expansion_order;  // expanded txids, traversal order
    std::set<std::string> dissolved;           // reached but not expanded

    bool expanded(const std::string& txid) const {
        return node_purity.count(txid) != 0 && dissolved.count(txid) == 0;
    }

    void write_tsv(const std::string& tsv_path) const;  // plus <path>.meta.json
    static TaintFlow read_tsv(const std::string& tsv_path);
};

// Eq-style purity of one transaction: the value-weighted mean of the input
// sources' purities. `purity_map` holds purities of expanded flow
// transactions; anything absent counts as untainted. Seeds are 1 by
// definition. All-zero input value yields 0 (the coin cannot carry taint).
double purity(const Ledger& ledger, const std::string& txid,
              const std::unordered_map<std::string, double>& purity_map,
              const std::set<std::string>& seeds);

// Haircut taint propagation from the seed set. A reached transaction is
// expanded iff its purity is >= purity_min and its time is within time_max of
// the earliest seed; every output of an expanded transaction becomes an edge
// carrying amount * purity, and its spender (if any) is enqueued.
TaintFlow extract_flow(const Ledger& ledger, const ActorIndex& actors, const TaintConfig& config,
                       const std::string& flow_id = "flow");

struct FlowStats {
    std::uint64_t transactions = 0;
    std::uint64_t distinct_clusters = 0;
    std::uint64_t edges = 0;
    std::uint64_t unspent_edges = 0;
    std::uint32_t max_depth = 0;
    std::uint64_t dissolved_leaves = 0;
    double total_seed_value = 0.0;
};

FlowStats flow_stats(const TaintFlow& flow);

std::set<std::string> flow_cluster_set(const TaintFlow& flow);

}  // namespace taintflow
