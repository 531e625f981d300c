#include <stdio.h>
#include <string.h>
#include "superflow.h"

#define CHECK(x) do { if ((x) != SF_STATUS_OK) { fprintf(stderr, "%s: %s\n", #x, sf_last_error()); return 1; } } while (0)

int main(void) {
    SfGraph *g = NULL;
    CHECK(sf_graph_new(2, 1, &g));
    CHECK(sf_graph_set_terminal(g, 0, 5, 0));
    CHECK(sf_graph_set_terminal(g, 1, 0, 3));
    CHECK(sf_graph_set_edge(g, 0, SF_DIR_RIGHT, 2));

    SfCut *cut = NULL;
    CHECK(sf_maxflow(g, &cut));
    uint8_t labels[2];
    CHECK(sf_cut_labels(cut, labels, sizeof labels));
    printf("flow=%llu labels=%u%u\n", (unsigned long long)sf_cut_flow(cut), labels[0], labels[1]);

    if (sf_graph_set_edge(g, 0, SF_DIR_LEFT, 1) != SF_STATUS_INVALID_ARGUMENT || strlen(sf_last_error()) == 0) {
        return 2;
    }
    sf_cut_free(cut);
    sf_graph_free(g);
    return 0;
}
