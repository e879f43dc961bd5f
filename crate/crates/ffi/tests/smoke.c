#include <math.h>
#include <stdio.h>
#include <string.h>

#include "softgait.h"

static int calls;

static int on_eval(void *user, uint64_t index, const SgAssignment *gait, double reward) {
    (void)user;
    (void)gait;
    (void)reward;
    calls = (int)index + 1;
    return 0;
}

#define CHECK(cond)                                   \
    do {                                              \
        if (!(cond)) {                                \
            fprintf(stderr, "failed: %s\n", #cond);   \
            return 1;                                 \
        }                                             \
    } while (0)

int main(void) {
    SgCoefficients k;
    CHECK(sg_preset(SG_AXIS_PLUS_X, &k) == SG_STATUS_OK);
    SgDisplacement d = {0.5, 0.1, -0.2};
    CHECK(fabs(sg_reward(&d, &k) - 0.47) < 1e-12);
    CHECK(sg_evals_required(4, 7) == 196);

    SgSimConfig cfg;
    CHECK(sg_sim_config_default(&cfg) == SG_STATUS_OK);
    cfg.seed = 5;
    SgSim *sim = NULL;
    CHECK(sg_sim_new(&cfg, &sim) == SG_STATUS_OK);

    SgEvalConfig eval = {0.1, 3, 0.0};
    SgAssignment start;
    memset(&start, 0, sizeof start);
    SgAssignment best;
    double reward = 0.0;
    CHECK(sg_tree_search(sim, &k, &eval, NULL, &start, 1, on_eval, NULL, &best, &reward) == SG_STATUS_OK);
    CHECK(calls == 196);

    double targets[SG_SERVO_TARGET_COUNT];
    CHECK(sg_servo_targets(&best, targets) == SG_STATUS_OK);
    for (int i = 32; i < SG_SERVO_TARGET_COUNT; i++) CHECK(targets[i] == 0.0);

    best.pairs[0].first = 9;
    CHECK(sg_servo_targets(&best, targets) == SG_STATUS_INVALID_ARGUMENT);
    char msg[128];
    CHECK(sg_last_error_message(msg, sizeof msg) > 0);

    sg_sim_free(sim);
    printf("ok %.4f\n", reward);
    return 0;
}
