/*
 * Copyright 2026 The cle-screen Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "evaluation/folds.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "common/error.hpp"

namespace cle::eval {

std::string_view to_string(Scheme scheme) noexcept {
  return scheme == Scheme::kLopo ? "LOPO" : "fixed-split";
}

namespace {

std::vector<std::string> sorted_unique(const std::vector<std::string>& v) {
  std::set<std::string> s(v.begin(), v.end());
  return {s.begin(), s.end()};
}

std::vector<std::string> intersection(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::string> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

void FoldPlan::check() const {
  for (std::size_t i = 0; i < folds.size(); ++i) {
    const auto shared = intersection(folds[i].train_patients, folds[i].test_patients);
    if (!shared.empty()) {
      fail(ErrorCode::kValidation, condition_name + ": fold " + std::to_string(i) + " leaks patient '" +
                                       shared.front() + "' into both train and test");
    }
  }
  if (scheme == Scheme::kFixedSplit) {
    if (folds.size() != 1) fail(ErrorCode::kValidation, condition_name + ": fixed split must have one fold");
    return;
  }
  std::map<std::string, int> tested;
  std::set<std::string> everyone;
  for (const auto& f : folds) {
    if (f.test_patients.size() != 1) fail(ErrorCode::kValidation, condition_name + ": LOPO test set is not a singleton");
    ++tested[f.test_patients.front()];
    everyone.insert(f.train_patients.begin(), f.train_patients.end());
    everyone.insert(f.test_patients.begin(), f.test_patients.end());
  }
  if (tested.size() != everyone.size() || folds.size() != everyone.size()) {
    fail(ErrorCode::kValidation, condition_name + ": LOPO does not test every patient exactly once");
  }
}

FoldPlan plan_lopo(const std::vector<std::string>& patients, std::string condition_name) {
  const auto ids = sorted_unique(patients);
  if (ids.size() < 2) fail(ErrorCode::kInvalidArgument, "LOPO needs at least two patients");
  FoldPlan plan{std::move(condition_name), Scheme::kLopo, {}};
  for (const auto& held_out : ids) {
    Fold f;
    f.test_patients = {held_out};
    for (const auto& p : ids) {
      if (p != held_out) f.train_patients.push_back(p);
    }
    plan.folds.push_back(std::move(f));
  }
  plan.check();
  return plan;
}

FoldPlan plan_cross_site(const std::vector<std::string>& train_patients,
                         const std::vector<std::string>& test_patients, std::string condition_name) {
  Fold f{sorted_unique(train_patients), sorted_unique(test_patients)};
  if (f.train_patients.empty() || f.test_patients.empty()) {
    fail(ErrorCode::kInvalidArgument, "cross-site split needs patients on both sides");
  }
  FoldPlan plan{std::move(condition_name), Scheme::kFixedSplit, {std::move(f)}};
  plan.check();
  return plan;
}

FoldPlan plan_cross_site(const ingest::Manifest& manifest, const std::string& train_dataset,
                         const std::string& test_dataset) {
  return plan_cross_site(ingest::select(manifest, {train_dataset}).patient_ids(),
                         ingest::select(manifest, {test_dataset}).patient_ids(),
                         train_dataset + "/" + test_dataset);
}

}  // namespace cle::eval
