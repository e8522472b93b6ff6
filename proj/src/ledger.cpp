#include "taintflow/ledger.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include <json.hpp>

namespace taintflow {

namespace {

bool is_hex(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
    }
    return true;
}

struct RawInput {
    std::string src;
    std::uint32_t vout;
};

struct RawTx {
    Transaction tx;
    std::vector<RawInput> raw_inputs;
    std::size_t line = 0;
};

Error parse_error(std::size_t line, const std::string& what) {
    return Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + what);
}

RawTx parse_line(const std::string& text, std::size_t line_no) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(line_no, e.what());
    }
    if (!j.is_object()) throw parse_error(line_no, "expected a JSON object");

    RawTx raw;
    raw.line = line_no;
    try {
        raw.tx.txid = j.at("txid").get<std::string>();
        raw.tx.time = j.at("time").get<std::int64_t>();
        raw.tx.is_coinbase = j.value("coinbase", false);
        for (const auto& in : j.value("inputs", nlohmann::json::array())) {
            RawInput ri;
            ri.src = in.at("src").get<std::string>();
            std::int64_t vout = in.at("vout").get<std::int64_t>();
            if (vout < 0) throw parse_error(line_no, "negative vout");
            ri.vout = static_cast<std::uint32_t>(vout);
            raw.raw_inputs.push_back(std::move(ri));
        }
        for (const auto& out : j.value("outputs", nlohmann::json::array())) {
            UtxoOut o;
            o.address = out.at("addr").get<std::string>();
            o.value = out.at("value").get<Satoshi>();
            if (o.address.empty()) throw parse_error(line_no, "empty address");
            raw.tx.outputs.push_back(std::move(o));
        }
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(line_no, e.what());
    }

    if (!is_hex(raw.tx.txid)) throw parse_error(line_no, "txid is not lowercase hex: '" + raw.tx.txid + "'");
    if (raw.tx.is_coinbase != raw.raw_inputs.empty()) {
        throw parse_error(line_no, raw.tx.is_coinbase ? "coinbase with inputs" : "non-coinbase without inputs");
    }
    return raw;
}

}  // namespace

TxIndex Ledger::index_of(const std::string& txid) const {
    auto it = by_txid_.find(txid);
    if (it == by_txid_.end()) throw Error(ErrorKind::UnknownTx, txid);
    return it->second;
}

const std::vector<UtxoOut>& Ledger::outputs_of(const std::string& txid) const {
    return txs_[index_of(txid)].outputs;
}

Satoshi Ledger::input_value(const Transaction& tx) const {
    Satoshi total = 0;
    for (const UtxoRef& in : tx.inputs) total += txs_[in.src].outputs[in.vout].value;
    return total;
}

Ledger ingest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);

    std::vector<RawTx> raws;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        raws.push_back(parse_line(line, line_no));
    }

    // Canonical order: (time, txid). Makes ingestion independent of file order.
    std::sort(raws.begin(), raws.end(), [](const RawTx& a, const RawTx& b) {
        if (a.tx.time != b.tx.time) return a.tx.time < b.tx.time;
        return a.tx.txid < b.tx.txid;
    });

    Ledger ledger;
    ledger.txs_.reserve(raws.size());
    for (auto& raw : raws) {
        TxIndex idx = static_cast<TxIndex>(ledger.txs_.size());
        if (!ledger.by_txid_.emplace(raw.tx.txid, idx).second) {
            throw Error(ErrorKind::DuplicateTx, raw.tx.txid);
        }
        for (const UtxoOut& out : raw.tx.outputs) {
            if (out.value < 0) {
                throw Error(ErrorKind::NonMonotonicValue,
                            "negative output value in " + raw.tx.txid);
            }
        }
        ledger.txs_.push_back(std::move(raw.tx));
    }

    // Resolve inputs and populate spent_by back-links.
    for (TxIndex spender = 0; spender < ledger.txs_.size(); ++spender) {
        const RawTx& raw = raws[spender];
        Transaction& tx = ledger.txs_[spender];
        for (const RawInput& ri : raw.raw_inputs) {
            auto it = ledger.by_txid_.find(ri.src);
            if (it == ledger.by_txid_.end()) {
                throw Error(ErrorKind::DanglingInput,
                            tx.txid + " spends unknown tx " + ri.src);
            }
            Transaction& src = ledger.txs_[it->second];
            if (ri.vout >= src.outputs.size()) {
                throw Error(ErrorKind::DanglingInput,
                            tx.txid + " spends " + ri.src + ":" + std::to_string(ri.vout) +
                                ", which has only " + std::to_string(src.outputs.size()) + " outputs");
            }
            if (it->second == spender) {
                throw Error(ErrorKind::DanglingInput, tx.txid + " spends its own output");
            }
            if (src.time > tx.time) {
                throw Error(ErrorKind::DanglingInput,
                            tx.txid + " spends " + ri.src + ", which is created later in time");
            }
            UtxoOut& utxo = src.outputs[ri.vout];
            if (utxo.spent()) {
                throw Error(ErrorKind::DoubleSpend,
                            ri.src + ":" + std::to_string(ri.vout) + " spent by both " +
                                ledger.txs_[utxo.spent_by].txid + " and " + tx.txid);
            }
            utxo.spent_by = spender;
            tx.inputs.push_back(UtxoRef{it->second, ri.vout});
        }
    }

    IngestStats& st = ledger.stats_;
    st.transactions = ledger.txs_.size();
    st.first_time = ledger.txs_.empty() ? 0 : ledger.txs_.front().time;
    st.last_time = ledger.txs_.empty() ? 0 : ledger.txs_.back().time;
    for (const Transaction& tx : ledger.txs_) {
        if (tx.is_coinbase) ++st.coinbase_transactions;
        st.outputs += tx.outputs.size();
        st.resolved_edges += tx.inputs.size();
        Satoshi out_sum = 0;
        for (const UtxoOut& o : tx.outputs) out_sum += o.value;
        st.total_output_value += out_sum;
        if (!tx.is_coinbase) {
            Satoshi in_sum = ledger.input_value(tx);
            if (out_sum > in_sum) {
                throw Error(ErrorKind::InsufficientInputValue,
                            tx.txid + " outputs " + std::to_string(out_sum) +
                                " exceed inputs " + std::to_string(in_sum));
            }
            st.total_fees += in_sum - out_sum;
        }
    }
    return ledger;
}

}  // namespace taintflow
