#include "protoicl/eval.hpp"

#include <stdexcept>

namespace protoicl {

std::string build_icl_prompt(const PromptSpec& spec) {
    if (spec.task.empty()) throw std::invalid_argument("build_icl_prompt: empty task");
    std::string out;
    for (const auto& [query, solution] : spec.demonstrations) {
        out += "You are an expert programmer, and here is your task: " + query + "\n[BEGIN]\n" +
               solution + "\n[DONE]\n\n";
    }
    out += "You are an expert Python programmer, and here is your task: " + spec.task +
           "\n[BEGIN]\n";
    return out;
}

double pass_at_k(int n, int c, int k) {
    if (c < 0 || c > n || k < 1 || k > n)
        throw std::invalid_argument("pass_at_k: need 0 <= c <= n and 1 <= k <= n");
    if (n - c < k) return 1.0;
    double prob_none = 1.0;
    for (int j = 0; j < k; ++j)
        prob_none *= static_cast<double>(n - c - j) / static_cast<double>(n - j);
    return 1.0 - prob_none;
}

double aggregate_pass_at_k(const std::vector<PassAtKInput>& rows, int k) {
    if (rows.empty()) throw std::invalid_argument("aggregate_pass_at_k: empty input");
    double sum = 0.0;
    for (const auto& r : rows) sum += pass_at_k(r.n, r.c, k);
    return sum / static_cast<double>(rows.size());
}

} // namespace protoicl
