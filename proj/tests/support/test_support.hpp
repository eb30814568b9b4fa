#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "affinity/embedding.hpp"
#include "affinity/learning.hpp"
#include "affinity/lexicon.hpp"

namespace affinity::testing {

std::filesystem::path fixtures_dir();
const Lexicon& default_lexicon();

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

ResponseExpression response(const std::string& candidate, const std::string& stimulus, const std::string& variant,
                            int rating, const std::string& context = "ctx");

// Candidates "c0".."c<n-1>" rating a subset of `keys` stimuli; key "s0" is
// always rated so every pair shares at least one key.
CandidateResponses random_dataset(std::mt19937_64& rng, int candidates, int keys, int rating_max,
                                  double coverage = 0.7);

EmotionVector random_simplex(std::mt19937_64& rng, int dims);

// Lexicon with `contexts` contexts "ctx-i", `words` words per context and
// random profiles; one color per dimension plus two mixed colors.
Lexicon random_lexicon(std::mt19937_64& rng, int dims, int contexts, int words, int num_classes);

// 1..3 slots whose vocabulary product stays within `limit`.
HeadlineTemplate random_template(std::mt19937_64& rng, const Lexicon& lexicon, std::size_t limit);

// Oracles, written without reference to the library internals.

// Mean of 1 - |a - b| / R over shared keys via a plain map lookup.
double oracle_candidate_affinity(const std::vector<ResponseExpression>& a, const std::vector<ResponseExpression>& b,
                                 int rating_max);

// Best summed affinity over every k-subset of medoids.
double oracle_best_objective(const CandidateResponses& dataset, int k, int rating_max);

struct OracleEmbedding {
    double score = -1.0;
    std::vector<std::string> words;  // slot order
};

// Enumerates every word tuple. The profile of a tuple is the equal-weight
// mean of the base components and the chosen word profiles, renormalized.
OracleEmbedding oracle_embedding(const HeadlineTemplate& tmpl, const EmotionVector& target, const Lexicon& lexicon,
                                 const std::vector<std::vector<double>>& base_profiles);

std::vector<double> oracle_emotion_vector(const std::vector<std::pair<double, std::vector<double>>>& terms,
                                          int dims);

} // namespace affinity::testing
