#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "taintflow/common.hpp"

namespace taintflow {

using TxIndex = std::uint32_t;

constexpr TxIndex kNoTx = 0xffffffffu;

struct UtxoRef {
    TxIndex src = kNoTx;  // resolved index of the funding transaction
    std::uint32_t vout = 0;
};

struct UtxoOut {
    std::string address;
    Satoshi value = 0;
    TxIndex spent_by = kNoTx;  // kNoTx while unspent

    bool spent() const { return spent_by != kNoTx; }
};

struct Transaction {
    std::string txid;
    std::int64_t time = 0;  // unix seconds
    bool is_coinbase = false;
    std::vector<UtxoRef> inputs;
    std::vector<UtxoOut> outputs;
};

struct IngestStats {
    std::uint64_t transactions = 0;
    std::uint64_t coinbase_transactions = 0;
    std::uint64_t resolved_edges = 0;  // spent UTXOs
    std::uint64_t outputs = 0;
    Satoshi total_output_value = 0;
    Satoshi total_fees = 0;
    std::int64_t first_time = 0;
    std::int64_t last_time = 0;
};

// Immutable transaction DAG in the UTXO model. Transactions are stored in
// canonical (time, txid) order; inputs are resolved to indices and every
// funding output carries a spent_by back-link.
class Ledger {
public:
    const std::vector<Transaction>& transactions() const { return txs_; }
    const Transaction& tx(TxIndex i) const { return txs_[i]; }
    std::size_t size() const { return txs_.size(); }

    bool contains(const std::string& txid) const { return by_txid_.count(txid) != 0; }
    TxIndex index_of(const std::string& txid) const;

    // Outputs of a transaction in vout order.
    const std::vector<UtxoOut>& outputs_of(const std::string& txid) const;

    Satoshi input_value(const Transaction& tx) const;

    const IngestStats& stats() const { return stats_; }

private:
    friend Ledger ingest(const std::string&);
    std::vector<Transaction> txs_;
    std::unordered_map<std::string, TxIndex> by_txid_;
    IngestStats stats_;
};

// Parses a newline-delimited JSON ledger file. One transaction per line:
//   {"txid": "<hex>", "time": <int>, "coinbase": <bool>,
//    "inputs": [{"src": "<hex>", "vout": <int>}],
//    "outputs": [{"addr": "<string>", "value": <int>}]}
Ledger ingest(const std::string& path);

}  // namespace taintflow
