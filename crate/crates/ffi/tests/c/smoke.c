#include <stdio.h>
#include <string.h>

#include "fanin.h"

#define CHECK(cond)                                                  \
    do {                                                             \
        if (!(cond)) {                                               \
            fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__,   \
                    __LINE__, #cond);                                \
            return 1;                                                \
        }                                                            \
    } while (0)

int main(void) {
    FaninConfig *cfg = fanin_config_default();
    CHECK(cfg != NULL);
    CHECK(fanin_config_device_count(cfg) == 3);

    FaninReport r;
    CHECK(fanin_evaluate(cfg, "oxram", 0.0, &r) == FANIN_STATUS_OK);
    CHECK(r.has_fan_in && r.fan_in == 350);
    CHECK(r.scale == FANIN_SCALE_LARGE);
    CHECK(r.flags == 0);

    CHECK(fanin_evaluate(cfg, "nosuch", 0.0, &r) == FANIN_STATUS_UNKNOWN_DEVICE);
    CHECK(strstr(fanin_last_error_message(), "sot_mram") != NULL);

    size_t event = 0;
    CHECK(fanin_simulate_first_fire(cfg, "oxram", 400, 0.0, 0.0, &event) == FANIN_STATUS_OK);
    CHECK(event == 351);

    char *csv = NULL;
    CHECK(fanin_sweep_csv(cfg, &csv) == FANIN_STATUS_OK);
    CHECK(strncmp(csv, "device,c_mem_farads", 19) == 0);
    fanin_string_free(csv);

    FaninConfig *parsed = NULL;
    CHECK(fanin_config_from_toml("[pulse]\nwidth = \"2u\"\nperiod = \"2u\"\n", &parsed) == FANIN_STATUS_OK);
    CHECK(fanin_evaluate(parsed, "oxram", 0.0, &r) == FANIN_STATUS_OK);
    CHECK(r.fan_in == 175);
    fanin_config_free(parsed);

    fanin_config_free(cfg);
    printf("ok %s\n", fanin_version());
    return 0;
}
