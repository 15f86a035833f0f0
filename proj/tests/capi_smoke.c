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

/* The public header must compile as C and the library must link from C. */
#include <clescreen/clescreen.h>

#include <stdio.h>
#include <string.h>

int main(void) {
  cle_manifest* m = NULL;
  if (strlen(cle_version()) == 0) return 1;
  if (cle_manifest_load("/nonexistent.csv", 0, &m) != CLE_ERR_IO) return 2;
  if (strlen(cle_last_error()) == 0) return 3;
  double probs[4] = {0.75, 0.25, 0.25, 0.75};
  double fused = 0.0;
  if (cle_fuse(probs, 2, "mean", &fused) != CLE_OK || fused != 0.5) return 4;
  printf("%s\n", cle_version());
  return 0;
}
