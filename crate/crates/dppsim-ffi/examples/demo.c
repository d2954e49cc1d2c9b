/* Minimal consumer of the dppsim C ABI: build a model, draw a sample,
 * print the points.
 *
 * Build from the repository root:
 *   cargo build --release -p dppsim-ffi
 *   cc crates/dppsim-ffi/examples/demo.c \
 *      -Icrates/dppsim-ffi/include \
 *      target/release/libdppsim_ffi.a -lm -o demo
 */
#include <stdio.h>
#include <stdlib.h>

#include "dppsim.h"

int main(void) {
    DppModel *model = NULL;
    DppStatus status = dpp_model_new(5.0, 3.0, false, 1.0, 1.0, &model);
    if (status != DPP_STATUS_OK) {
        fprintf(stderr, "model: %s\n", dpp_last_error_message());
        return 1;
    }
    printf("dppsim %s: truncation %zu, expected points %.4f\n",
           dpp_version(), dpp_model_truncation(model), dpp_model_trace(model));

    DppSample *sample = NULL;
    status = dpp_sample(model, DPP_MODE_RING, 42, 0, &sample);
    if (status != DPP_STATUS_OK) {
        fprintf(stderr, "sample: %s\n", dpp_last_error_message());
        dpp_model_free(model);
        return 1;
    }
    size_t len = dpp_sample_len(sample);
    double *points = malloc(2 * len * sizeof(double));
    if (points == NULL || dpp_sample_points(sample, points) != DPP_STATUS_OK) {
        fprintf(stderr, "copy-out failed\n");
        free(points);
        dpp_sample_free(sample);
        dpp_model_free(model);
        return 1;
    }
    printf("drew %zu points; first few:\n", len);
    for (size_t i = 0; i < len && i < 5; i++) {
        printf("  % .6f %+.6fi\n", points[2 * i], points[2 * i + 1]);
    }

    free(points);
    dpp_sample_free(sample);
    dpp_model_free(model);
    return 0;
}
