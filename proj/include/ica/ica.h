// Copyright 2026 The ICA Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


/* C interface to the ICA toolkit.
 *
 * Every function returns an ica_status. Outputs come back through pointer
 * arguments; strings returned as char** are JSON (or plain text where noted),
 * owned by the caller and released with ica_string_free. After a failure
 * ica_last_error() describes it; the message is thread-local and valid until
 * the next call on the same thread.
 *
 * On failure every out-handle is set to NULL.
 *
 * Handles are opaque. A kb and a config may be shared between threads once
 * created; clients are safe for concurrent use; a server is driven by one
 * thread plus ica_server_stop from any thread.
 */

#ifndef ICA_ICA_H_
#define ICA_ICA_H_

#include <stddef.h>
#include <stdint.h>

#if defined(ICA_BUILDING_LIBRARY)
#define ICA_API __attribute__((visibility("default")))
#else
#define ICA_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ica_status {
  ICA_OK = 0,
  ICA_ERR_INVALID_ARGUMENT = 1,
  ICA_ERR_PARSE = 2,
  ICA_ERR_VALIDATION = 3,
  ICA_ERR_NOT_FOUND = 4,
  ICA_ERR_GENERATION = 5,
  ICA_ERR_IO = 6,
  ICA_ERR_TRANSPORT = 7,
  ICA_ERR_TIMEOUT = 8,
  ICA_ERR_BUDGET = 9,
  ICA_ERR_INTERNAL = 10
} ica_status;

typedef struct ica_config ica_config;
typedef struct ica_kb ica_kb;
typedef struct ica_client ica_client;
typedef struct ica_server ica_server;

ICA_API const char* ica_version(void);
/* "validation_error", "timeout", ... */
ICA_API const char* ica_status_name(ica_status status);
ICA_API const char* ica_last_error(void);
/* "client", "context" or "classifier" for stage failures, otherwise "". */
ICA_API const char* ica_last_error_stage(void);
ICA_API void ica_string_free(char* s);

/* Config: defaults, then the key = value file (path may be NULL), then
 * ICA_<KEY> environment overrides. */
ICA_API ica_status ica_config_load(const char* path, ica_config** out);
ICA_API ica_status ica_config_set(ica_config* config, const char* key, const char* value);
ICA_API ica_status ica_config_to_json(const ica_config* config, char** out_json);
ICA_API void ica_config_free(ica_config* config);

/* Directory of <id>.ica files plus actions.json and optional aliases.json. */
ICA_API ica_status ica_kb_load(const char* dir, ica_kb** out);
/* {"workflows": [{"workflow_id", "intent", "actions"}], "actions": n} */
ICA_API ica_status ica_kb_describe(const ica_kb* kb, char** out_json);
ICA_API void ica_kb_free(ica_kb* kb);

/* HTML file or directory -> <id>.ica, actions.json, review_report.json.
 * Summary: {"workflows", "flagged_blocks", "written": [...]} */
ICA_API ica_status ica_convert(const char* input, const char* out_dir, char** out_summary_json);

/* {"ok", "diagnostics": [{line, column, severity, message}],
 *  "warnings": [{code, line, message}]} -- parse errors are reported here,
 * not through the status. */
ICA_API ica_status ica_lint(const char* ica_text, const char* workflow_id, char** out_json);

/* Request {"query", "intent"?, "context"?, "workflows"?: [ids]}; without
 * workflows the top-k retrieved ones are used. Reply: the evaluation trace. */
ICA_API ica_status ica_run(const ica_kb* kb, const ica_config* config, const char* request_json, char** out_json);

/* [{"workflow_id", "score"}] */
ICA_API ica_status ica_retrieve(const ica_kb* kb, const char* query, size_t k, char** out_json);

/* Writes n instances as JSONL to out_path. Stats: {"emitted", "skipped",
 * "duplicates", "skip_rate", "skip_reasons"} */
ICA_API ica_status ica_synth(const ica_config* config, const char* pools_dir, size_t n, uint64_t seed,
                             const char* out_path, char** out_stats_json);

/* Client named by the config: "oracle", "corrupt" (oracle answers corrupted
 * with probability client.corrupt_p, seeded by `seed`) or "http". The mocks
 * read rich-text prompts through kb, which must outlive the client. */
ICA_API ica_status ica_client_create(const ica_config* config, const ica_kb* kb, uint64_t seed, ica_client** out);
/* {"kind", "calls", "corrupted", "injected_latencies": [...]} */
ICA_API ica_status ica_client_stats(const ica_client* client, char** out_json);
ICA_API void ica_client_free(ica_client* client);

/* Request {"query", "intent"?, "context"?, "query_id"?, "candidates"?}.
 * Context is taken from the request, else from context.url when set. */
ICA_API ica_status ica_predict(const ica_kb* kb, ica_client* client, const ica_config* config,
                               const char* request_json, char** out_json);

/* Runs the JSONL cases at cases_path; the reply is the full report. */
ICA_API ica_status ica_eval(const ica_kb* kb, ica_client* client, const ica_config* config, const char* cases_path,
                            char** out_json);

/* Builds a labeled set from a synth JSONL file. pools_dir and base_kb_dir may
 * be NULL. Writes the merged knowledge base to out_kb_dir and the cases to
 * out_cases_path. Summary: {"cases", "workflows", "skipped"} */
ICA_API ica_status ica_derive_eval(const char* synth_jsonl, const char* pools_dir, const char* base_kb_dir,
                                   uint64_t seed, int cases_per_base_workflow, const char* out_kb_dir,
                                   const char* out_cases_path, char** out_summary_json);

/* reports_json: array of reports. Reply {"json": {...}, "text": "..."} */
ICA_API ica_status ica_compare(const char* reports_json, char** out_json);

/* Binds immediately (port 0: ephemeral); serving starts in ica_server_run. */
ICA_API ica_status ica_server_create(const ica_kb* kb, ica_client* client, const ica_config* config,
                                     const char* host, int port, ica_server** out);
ICA_API int ica_server_port(const ica_server* server);
/* Blocks until ica_server_stop. */
ICA_API ica_status ica_server_run(ica_server* server);
ICA_API void ica_server_stop(ica_server* server);
ICA_API void ica_server_free(ica_server* server);

#ifdef __cplusplus
}
#endif

#endif /* ICA_ICA_H_ */
