#pragma once

#include "termgraph/corpus.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace termgraph {

struct TermTimeline {
    std::string term_id;
    std::map<int, std::size_t> counts_by_year;
    std::optional<int> first_year;
    // first year the term is co-labeled with any opposite-kind term
    std::optional<int> first_cooccurrence_year;
};

// One count per document per label per year; documents without a year are
// excluded from time-based statistics only.
std::map<std::string, TermTimeline> term_frequencies(const Corpus& corpus);

// year -> number of terms of the given kind whose first appearance is that year
std::map<int, std::size_t> innovation_curve(const std::map<std::string, TermTimeline>& timelines,
                                            TermKind kind, const Lexicon& lexicon);

struct LagResult {
    std::map<std::string, int> lags; // construct -> years to first task co-label
    std::vector<std::string> never_cooccurring;
    std::optional<double> mean_lag;
};

LagResult operationalization_lag(const std::map<std::string, TermTimeline>& timelines,
                                 const Lexicon& lexicon);

struct TasksPerPaper {
    std::map<std::size_t, std::size_t> histogram; // task-label count -> papers
    double multi_task_share = 0.0;                // fraction with >= 2 task labels
};

TasksPerPaper tasks_per_paper(const Corpus& corpus);

struct DisciplineProfileParams {
    double epsilon = 1e-3;
    int n_samples = 4096;
    std::uint64_t seed = 17;
    double shrinkage = 0.1;
    std::size_t min_docs_per_discipline = 10;
    std::size_t min_docs_per_term = 2;
};

struct DisciplineProfile {
    Discipline discipline;
    std::size_t docs = 0;
    // construct -> task -> inverse-divergence weight
    std::map<std::string, std::map<std::string, double>> assoc;
};

struct ProfileOverlap {
    std::string construct;
    Discipline a;
    Discipline b;
    double cosine; // of the construct's task-association rows
};

struct DisciplineProfilesResult {
    std::vector<DisciplineProfile> profiles;
    std::vector<ProfileOverlap> overlaps;
    std::vector<std::string> skipped; // disciplines below minimum size
};

// Per-discipline term-graph association tables over the documents carrying
// each discipline tag; doc_topics are the kept documents' topic rows.
DisciplineProfilesResult discipline_profiles(const Corpus& corpus,
                                             const std::map<std::string, Eigen::VectorXd>& doc_topics,
                                             const DisciplineProfileParams& params);

// CSV exports backing the descriptive-statistics figures
void export_timelines_csv(const std::map<std::string, TermTimeline>& timelines,
                          const std::filesystem::path& path);
void export_innovation_csv(const std::map<std::string, TermTimeline>& timelines,
                           const Lexicon& lexicon, const std::filesystem::path& path);
void export_lags_csv(const LagResult& lags, const std::filesystem::path& path);
void export_histogram_csv(const TasksPerPaper& hist, const std::filesystem::path& path);
void export_discipline_csv(const DisciplineProfilesResult& result,
                           const std::filesystem::path& assoc_path,
                           const std::filesystem::path& overlap_path);

} // namespace termgraph
