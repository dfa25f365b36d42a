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


// Exercises the C interface from plain C.

#include <pthread.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "ica/ica.h"

static int failures = 0;

#define EXPECT(cond)                                                  \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      failures++;                                                     \
    }                                                                 \
  } while (0)

#define EXPECT_OK(call)                                                                       \
  do {                                                                                        \
    ica_status s_ = (call);                                                                   \
    if (s_ != ICA_OK) {                                                                       \
      fprintf(stderr, "%s:%d: %s -> %s: %s\n", __FILE__, __LINE__, #call, ica_status_name(s_), \
              ica_last_error());                                                              \
      failures++;                                                                             \
    }                                                                                         \
  } while (0)

static void* serve(void* arg) {
  ica_server_run((ica_server*)arg);
  return NULL;
}

static char* path(const char* dir, const char* name) {
  char* p = malloc(strlen(dir) + strlen(name) + 2);
  sprintf(p, "%s/%s", dir, name);
  return p;
}

int main(int argc, char** argv) {
  if (argc != 3) {
    fprintf(stderr, "usage: %s <fixtures dir> <scratch dir>\n", argv[0]);
    return 2;
  }
  const char* fixtures = argv[1];
  const char* scratch = argv[2];
  char* out = NULL;

  EXPECT(strcmp(ica_status_name(ICA_ERR_VALIDATION), "validation_error") == 0);
  EXPECT(strcmp(ica_status_name(ICA_ERR_TIMEOUT), "timeout") == 0);
  EXPECT(strlen(ica_version()) > 0);

  // config
  ica_config* cfg = NULL;
  EXPECT_OK(ica_config_load(NULL, &cfg));
  EXPECT(ica_config_set(cfg, "retrieval.kk", "3") == ICA_ERR_VALIDATION);
  EXPECT(strstr(ica_last_error(), "retrieval.kk") != NULL);
  EXPECT(ica_config_set(cfg, "retrieval.k", "0") == ICA_ERR_VALIDATION);
  EXPECT_OK(ica_config_set(cfg, "retrieval.k", "3"));
  EXPECT_OK(ica_config_to_json(cfg, &out));
  EXPECT(strstr(out, "\"retrieval.k\":3") != NULL);
  EXPECT(strstr(out, "\"predict.max_output_tokens\":512") != NULL);
  ica_string_free(out);
  ica_config* missing = NULL;
  EXPECT(ica_config_load("/nonexistent/ica.conf", &missing) == ICA_ERR_IO);
  EXPECT(missing == NULL);

  // null arguments
  EXPECT(ica_kb_load(NULL, NULL) == ICA_ERR_INVALID_ARGUMENT);
  EXPECT(ica_compare("[]", NULL) == ICA_ERR_INVALID_ARGUMENT);

  // lint
  EXPECT_OK(ica_lint("intent: x\n  then do Action 1\n", "w", &out));
  EXPECT(strstr(out, "\"ok\":true") != NULL);
  ica_string_free(out);
  EXPECT_OK(ica_lint("intent: x\n    then do Action 1\n", "w", &out));
  EXPECT(strstr(out, "\"ok\":false") != NULL);
  EXPECT(strstr(out, "\"severity\":\"error\"") != NULL);
  ica_string_free(out);

  // convert, then load what it wrote
  char* html = path(fixtures, "html");
  char* conv = path(scratch, "kb");
  EXPECT_OK(ica_convert(html, conv, &out));
  EXPECT(strstr(out, "\"workflows\":") != NULL);
  ica_string_free(out);
  ica_kb* kb = NULL;
  EXPECT(ica_kb_load("/nonexistent", &kb) == ICA_ERR_NOT_FOUND);
  EXPECT(kb == NULL);
  EXPECT_OK(ica_kb_load(conv, &kb));
  EXPECT_OK(ica_kb_describe(kb, &out));
  EXPECT(strstr(out, "\"workflow_id\":\"workflow_01\"") != NULL);
  ica_string_free(out);

  EXPECT_OK(ica_retrieve(kb, "cancel my reservation", 3, &out));
  EXPECT(out[0] == '[');
  ica_string_free(out);
  EXPECT(ica_retrieve(kb, "x", 0, &out) == ICA_ERR_INVALID_ARGUMENT);

  EXPECT_OK(ica_run(kb, cfg, "{\"query\":\"cancel\",\"workflows\":[\"workflow_01\"],\"context\":{}}", &out));
  EXPECT(strstr(out, "\"branches\"") != NULL);
  ica_string_free(out);
  EXPECT(ica_run(kb, cfg, "{\"query\":\"q\",\"workflows\":[\"ghost\"]}", &out) == ICA_ERR_NOT_FOUND);
  EXPECT(ica_run(kb, cfg, "{not json", &out) == ICA_ERR_PARSE);

  // synth -> derive-eval -> eval with the oracle mock
  char* pools = path(fixtures, "pools");
  char* data = path(scratch, "synth.jsonl");
  EXPECT_OK(ica_synth(cfg, pools, 30, 1, data, &out));
  EXPECT(strstr(out, "\"emitted\":30") != NULL);
  ica_string_free(out);
  char* derived = path(scratch, "derived");
  char* cases = path(scratch, "cases.jsonl");
  EXPECT_OK(ica_derive_eval(data, pools, conv, 1, 2, derived, cases, &out));
  EXPECT(strstr(out, "\"cases\":") != NULL);
  ica_string_free(out);

  ica_kb* dkb = NULL;
  EXPECT_OK(ica_kb_load(derived, &dkb));
  ica_client* client = NULL;
  EXPECT_OK(ica_client_create(cfg, dkb, 0, &client));
  EXPECT_OK(ica_eval(dkb, client, cfg, cases, &out));
  EXPECT(strstr(out, "\"acc\":1.0") != NULL);
  EXPECT(strstr(out, "\"client\":\"oracle\"") != NULL);

  // compare needs two arms
  char* reports = malloc(strlen(out) * 2 + 8);
  sprintf(reports, "[%s]", out);
  char* cmp = NULL;
  EXPECT(ica_compare(reports, &cmp) == ICA_ERR_VALIDATION);
  free(reports);
  ica_string_free(out);

  EXPECT_OK(ica_predict(dkb, client, cfg, "{\"query\":\"I need to cancel my reservation\",\"context\":{}}", &out));
  EXPECT(strstr(out, "\"status\"") != NULL);
  ica_string_free(out);
  EXPECT(ica_predict(dkb, client, cfg, "{\"query\":\"q\",\"candidates\":[\"ghost\"]}", &out) == ICA_ERR_NOT_FOUND);
  EXPECT_OK(ica_client_stats(client, &out));
  EXPECT(strstr(out, "\"kind\":\"oracle\"") != NULL);
  ica_string_free(out);

  // http client without an endpoint is refused
  ica_config* hcfg = NULL;
  EXPECT_OK(ica_config_load(NULL, &hcfg));
  EXPECT_OK(ica_config_set(hcfg, "client", "http"));
  EXPECT_OK(ica_config_set(hcfg, "client.endpoint", "http://127.0.0.1:9/v1/chat/completions"));
  ica_client* hclient = NULL;
  EXPECT_OK(ica_client_create(hcfg, NULL, 0, &hclient));
  EXPECT(ica_predict(dkb, hclient, hcfg, "{\"query\":\"I need to cancel my reservation\",\"context\":{}}", &out) ==
         ICA_ERR_TRANSPORT);
  EXPECT(strcmp(ica_last_error_stage(), "client") == 0);
  ica_client_free(hclient);
  ica_config_free(hcfg);

  // server on an ephemeral port, stopped from this thread
  ica_server* server = NULL;
  EXPECT_OK(ica_server_create(dkb, client, cfg, "127.0.0.1", 0, &server));
  EXPECT(ica_server_port(server) > 0);
  pthread_t t;
  pthread_create(&t, NULL, serve, server);
  ica_server_stop(server);
  pthread_join(t, NULL);
  ica_server_free(server);

  ica_client_free(client);
  ica_kb_free(dkb);
  ica_kb_free(kb);
  ica_config_free(cfg);
  free(html);
  free(conv);
  free(pools);
  free(data);
  free(derived);
  free(cases);

  if (failures) {
    fprintf(stderr, "%d failure(s)\n", failures);
    return 1;
  }
  printf("capi: all checks passed\n");
  return 0;
}
