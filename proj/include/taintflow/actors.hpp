#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "taintflow/ledger.hpp"

namespace taintflow {

enum class ActorType {
    Exchange,
    Wallet,
    Service,
    Marketplace,
    Mixer,
    Lending,
    Gambling,
    Mining,
    Unknown,
};

ActorType parse_actor_type(const std::string& s);  // throws UnknownType
const char* actor_type_name(ActorType t);

struct ActorLabel {
    std::string name;
    ActorType type = ActorType::Unknown;
};

// Address -> actor partition from the common-input heuristic. Cluster ids are
// canonical: the lexicographically smallest member address.
class ActorIndex {
public:
    // Addresses never seen during clustering are their own singleton cluster.
    std::string cluster_of(const std::string& address) const;

    const std::map<std::string, std::vector<std::string>>& clusters() const { return clusters_; }

    const ActorLabel* label_of(const std::string& cluster_id) const;
    void set_label(const std::string& cluster_id, const ActorLabel& label);

    // All cluster ids that carry a label.
    std::set<std::string> labeled_clusters() const;

    void save_json(const std::string& path) const;
    static ActorIndex load_json(const std::string& path);

    friend ActorIndex cluster_addresses(const Ledger&, bool);

private:
    std::unordered_map<std::string, std::string> addr_to_cluster_;
    std::map<std::string, std::vector<std::string>> clusters_;  // id -> sorted members
    std::unordered_map<std::string, ActorLabel> labels_;
};

// All input addresses of a non-coinbase, non-CoinJoin transaction are merged
// into one cluster.
ActorIndex cluster_addresses(const Ledger& ledger, bool coinjoin_filter = true);

// Equal-output-value CoinJoin heuristic: >= 2 inputs, >= 3 outputs, the most
// frequent output value occurs >= 2 times, and the distinct input addresses
// are at least as many as those equal-valued outputs.
bool is_coinjoin(const Ledger& ledger, const Transaction& tx);

using LabelTable = std::vector<std::pair<std::string, ActorLabel>>;  // address -> label

// Reads a labels CSV (`address,name,type`, with header).
LabelTable load_labels(const std::string& path);

// Applies labels by cluster closure; conflicting names within a cluster fail.
void apply_labels(ActorIndex& index, const LabelTable& table);

enum class VocabularyMode { All, Frequent, KnownName, KnownType };

VocabularyMode parse_vocabulary_mode(const std::string& s);
const char* vocabulary_mode_name(VocabularyMode m);

struct TagActorSet {
    VocabularyMode mode = VocabularyMode::All;
    std::set<std::string> members;  // cluster ids; used by Frequent/Known modes
    double threshold = 0.5;

    bool contains(const std::string& cluster_id) const {
        return mode == VocabularyMode::All || members.count(cluster_id) != 0;
    }
};

// Clusters present in strictly more than threshold * |corpus| flows.
// Each element of `flow_clusters` is the set of clusters touched by one flow.
TagActorSet frequent_clusters(const std::vector<std::set<std::string>>& flow_clusters,
                              double threshold = 0.5);

TagActorSet make_tag_set(VocabularyMode mode, const ActorIndex& actors,
                         const std::vector<std::set<std::string>>& flow_clusters,
                         double frequent_threshold = 0.5);

}  // namespace taintflow
