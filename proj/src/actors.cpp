#include "taintflow/actors.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace taintflow {

ActorType parse_actor_type(const std::string& s) {
    if (s == "exchange") return ActorType::Exchange;
    if (s == "wallet") return ActorType::Wallet;
    if (s == "service") return ActorType::Service;
    if (s == "marketplace") return ActorType::Marketplace;
    if (s == "mixer") return ActorType::Mixer;
    if (s == "lending") return ActorType::Lending;
    if (s == "gambling") return ActorType::Gambling;
    if (s == "mining") return ActorType::Mining;
    if (s == "unknown") return ActorType::Unknown;
    throw Error(ErrorKind::UnknownType, "'" + s + "' is not an actor type");
}

const char* actor_type_name(ActorType t) {
    switch (t) {
        case ActorType::Exchange: return "exchange";
        case ActorType::Wallet: return "wallet";
        case ActorType::Service: return "service";
        case ActorType::Marketplace: return "marketplace";
        case ActorType::Mixer: return "mixer";
        case ActorType::Lending: return "lending";
        case ActorType::Gambling: return "gambling";
        case ActorType::Mining: return "mining";
        case ActorType::Unknown: return "unknown";
    }
    return "unknown";
}

std::string ActorIndex::cluster_of(const std::string& address) const {
    auto it = addr_to_cluster_.find(address);
    if (it == addr_to_cluster_.end()) return address;
    return it->second;
}

const ActorLabel* ActorIndex::label_of(const std::string& cluster_id) const {
    auto it = labels_.find(cluster_id);
    return it == labels_.end() ? nullptr : &it->second;
}

void ActorIndex::set_label(const std::string& cluster_id, const ActorLabel& label) {
    labels_[cluster_id] = label;
}

std::set<std::string> ActorIndex::labeled_clusters() const {
    std::set<std::string> out;
    for (const auto& [id, _] : labels_) out.insert(id);
    return out;
}

namespace {

// Union-find over interned address ids, union by size with path compression.
struct UnionFind {
    std::vector<std::uint32_t> parent;
    std::vector<std::uint32_t> size;

    std::uint32_t add() {
        parent.push_back(static_cast<std::uint32_t>(parent.size()));
        size.push_back(1);
        return parent.back();
    }

    std::uint32_t find(std::uint32_t x) {
        std::uint32_t root = x;
        while (parent[root] != root) root = parent[root];
        while (parent[x] != root) {
            std::uint32_t next = parent[x];
            parent[x] = root;
            x = next;
        }
        return root;
    }

    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (size[a] < size[b]) std::swap(a, b);
        parent[b] = a;
        size[a] += size[b];
    }
};

}  // namespace

bool is_coinjoin(const Ledger& ledger, const Transaction& tx) {
    if (tx.inputs.size() < 2 || tx.outputs.size() < 3) return false;

    std::map<Satoshi, std::size_t> value_counts;
    for (const UtxoOut& out : tx.outputs) ++value_counts[out.value];
    std::size_t equal_outputs = 0;
    for (const auto& [value, count] : value_counts) equal_outputs = std::max(equal_outputs, count);
    if (equal_outputs < 2) return false;

    std::set<std::string> input_addresses;
    for (const UtxoRef& in : tx.inputs) {
        input_addresses.insert(ledger.tx(in.src).outputs[in.vout].address);
    }
    return input_addresses.size() >= equal_outputs;
}

ActorIndex cluster_addresses(const Ledger& ledger, bool coinjoin_filter) {
    std::unordered_map<std::string, std::uint32_t> intern;
    std::vector<const std::string*> addresses;
    UnionFind uf;

    auto id_of = [&](const std::string& addr) {
        auto [it, added] = intern.emplace(addr, static_cast<std::uint32_t>(addresses.size()));
        if (added) {
            addresses.push_back(&it->first);
            uf.add();
        }
        return it->second;
    };

    for (const Transaction& tx : ledger.transactions()) {
        for (const UtxoOut& out : tx.outputs) id_of(out.address);
        if (tx.is_coinbase || tx.inputs.empty()) continue;
        if (coinjoin_filter && is_coinjoin(ledger, tx)) continue;
        std::uint32_t first = id_of(ledger.tx(tx.inputs[0].src).outputs[tx.inputs[0].vout].address);
        for (std::size_t i = 1; i < tx.inputs.size(); ++i) {
            const UtxoRef& in = tx.inputs[i];
            uf.unite(first, id_of(ledger.tx(in.src).outputs[in.vout].address));
        }
    }

    // Canonical id per component: lexicographically smallest member address.
    std::unordered_map<std::uint32_t, std::string> root_id;
    for (std::uint32_t i = 0; i < addresses.size(); ++i) {
        std::uint32_t root = uf.find(i);
        auto it = root_id.find(root);
        if (it == root_id.end() || *addresses[i] < it->second) root_id[root] = *addresses[i];
    }

    ActorIndex index;
    for (std::uint32_t i = 0; i < addresses.size(); ++i) {
        const std::string& id = root_id[uf.find(i)];
        index.addr_to_cluster_.emplace(*addresses[i], id);
        index.clusters_[id].push_back(*addresses[i]);
    }
    for (auto& [_, members] : index.clusters_) std::sort(members.begin(), members.end());
    return index;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

}  // namespace

LabelTable load_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
    LabelTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line.rfind("address,", 0) == 0) continue;  // header
        auto fields = split_csv_line(line);
        if (fields.size() != 3) {
            throw Error(ErrorKind::ParseError,
                        path + " line " + std::to_string(line_no) + ": expected address,name,type");
        }
        table.emplace_back(fields[0], ActorLabel{fields[1], parse_actor_type(fields[2])});
    }
    return table;
}

void apply_labels(ActorIndex& index, const LabelTable& table) {
    for (const auto& [address, label] : table) {
        const std::string& cluster = index.cluster_of(address);
        if (const ActorLabel* existing = index.label_of(cluster)) {
            if (existing->name != label.name || existing->type != label.type) {
                throw Error(ErrorKind::ConflictingLabel,
                            "cluster " + cluster + " labeled both '" + existing->name +
                                "' and '" + label.name + "'");
            }
            continue;
        }
        index.set_label(cluster, label);
    }
}

VocabularyMode parse_vocabulary_mode(const std::string& s) {
    if (s == "all") return VocabularyMode::All;
    if (s == "frequent") return VocabularyMode::Frequent;
    if (s == "known-name" || s == "known_name") return VocabularyMode::KnownName;
    if (s == "known-type" || s == "known_type") return VocabularyMode::KnownType;
    throw Error(ErrorKind::ConfigInvalid, "'" + s + "' is not a vocabulary mode");
}

const char* vocabulary_mode_name(VocabularyMode m) {
    switch (m) {
        case VocabularyMode::All: return "all";
        case VocabularyMode::Frequent: return "frequent";
        case VocabularyMode::KnownName: return "known-name";
        case VocabularyMode::KnownType: return "known-type";
    }
    return "all";
}

TagActorSet frequent_clusters(const std::vector<std::set<std::string>>& flow_clusters,
                              double threshold) {
    if (flow_clusters.empty()) throw Error(ErrorKind::EmptyCorpus, "no flows");
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw Error(ErrorKind::ConfigInvalid, "frequency threshold must be in (0,1]");
    }
    std::map<std::string, std::size_t> presence;
    for (const auto& clusters : flow_clusters) {
        for (const auto& c : clusters) ++presence[c];
    }
    TagActorSet set;
    set.mode = VocabularyMode::Frequent;
    set.threshold = threshold;
    const double cutoff = threshold * static_cast<double>(flow_clusters.size());
    for (const auto& [cluster, count] : presence) {
        if (static_cast<double>(count) > cutoff) set.members.insert(cluster);
    }
    return set;
}

TagActorSet make_tag_set(VocabularyMode mode, const ActorIndex& actors,
                         const std::vector<std::set<std::string>>& flow_clusters,
                         double frequent_threshold) {
    switch (mode) {
        case VocabularyMode::All: {
            TagActorSet set;
            set.mode = mode;
            return set;
        }
        case VocabularyMode::Frequent:
            return frequent_clusters(flow_clusters, frequent_threshold);
        case VocabularyMode::KnownName:
        case VocabularyMode::KnownType: {
            TagActorSet set;
            set.mode = mode;
            set.members = actors.labeled_clusters();
            return set;
        }
    }
    throw Error(ErrorKind::ConfigInvalid, "bad vocabulary mode");
}

void ActorIndex::save_json(const std::string& path) const {
    nlohmann::json j;
    j["format"] = "taintflow-actors";
    j["version"] = 1;
    nlohmann::json clusters = nlohmann::json::object();
    for (const auto& [id, members] : clusters_) clusters[id] = members;
    j["clusters"] = std::move(clusters);
    nlohmann::json labels = nlohmann::json::object();
    for (const auto& id : labeled_clusters()) {
        const ActorLabel* label = label_of(id);
        labels[id] = {{"name", label->name}, {"type", actor_type_name(label->type)}};
    }
    j["labels"] = std::move(labels);
    write_text_file(path, j.dump(2) + "\n");
}

ActorIndex ActorIndex::load_json(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, path + ": " + e.what());
    }
    if (j.value("format", "") != "taintflow-actors") {
        throw Error(ErrorKind::ParseError, path + " is not an actors file");
    }
    ActorIndex index;
    for (const auto& [id, members] : j.at("clusters").items()) {
        std::vector<std::string> addrs = members.get<std::vector<std::string>>();
        std::sort(addrs.begin(), addrs.end());
        for (const auto& addr : addrs) index.addr_to_cluster_.emplace(addr, id);
        index.clusters_.emplace(id, std::move(addrs));
    }
    for (const auto& [id, label] : j.at("labels").items()) {
        index.labels_[id] = ActorLabel{label.at("name").get<std::string>(),
                                       parse_actor_type(label.at("type").get<std::string>())};
    }
    return index;
}

}  // namespace taintflow
