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

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ingest/manifest.hpp"

namespace cle::eval {

enum class Scheme { kLopo, kFixedSplit };

std::string_view to_string(Scheme scheme) noexcept;

struct Fold {
  std::vector<std::string> train_patients;  // sorted
  std::vector<std::string> test_patients;   // sorted

  friend bool operator==(const Fold&, const Fold&) = default;
};

struct FoldPlan {
  std::string condition_name;
  Scheme scheme = Scheme::kLopo;
  std::vector<Fold> folds;

  // Throws kValidation if any fold shares a patient between train and test,
  // or if the plan breaks its scheme's shape (LOPO: singleton test sets
  // covering every patient exactly once; fixed split: one fold).
  void check() const;
};

/// One fold per patient (sorted by id); fold i tests patient i and trains on
/// all others. Throws kInvalidArgument with fewer than two patients.
FoldPlan plan_lopo(const std::vector<std::string>& patients, std::string condition_name = "LOPO");

/// Single fold: every train patient against every test patient. Throws
/// kValidation if the pools share a patient.
FoldPlan plan_cross_site(const std::vector<std::string>& train_patients,
                         const std::vector<std::string>& test_patients, std::string condition_name = "cross-site");

// Patient pools taken from two datasets of a manifest.
FoldPlan plan_cross_site(const ingest::Manifest& manifest, const std::string& train_dataset,
                         const std::string& test_dataset);

}  // namespace cle::eval
