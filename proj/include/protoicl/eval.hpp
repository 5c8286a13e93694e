#pragma once

#include <string>
#include <utility>
#include <vector>

namespace protoicl {

struct PromptSpec {
    std::vector<std::pair<std::string, std::string>> demonstrations;  // (query, solution)
    std::string task;
};

std::string build_icl_prompt(const PromptSpec& spec);

struct PassAtKInput {
    std::string problem_id;
    int n = 0;  // samples generated
    int c = 0;  // correct count
};

/// 1 - C(n-c, k)/C(n, k) via the stable product form.
double pass_at_k(int n, int c, int k);

double aggregate_pass_at_k(const std::vector<PassAtKInput>& rows, int k);

} // namespace protoicl
