#include <math.h>
#include <stdio.h>
#include <string.h>

#include "eitchain.h"

int main(void) {
    EitAtom atom = {1.0, 1.0, 0.2, 0.1, 0.1, 0.1, 0.0};
    EitChain *chain = NULL;
    if (eit_chain_periodic(&atom, 4, 0.5, &chain) != EIT_STATUS_OK) return 1;

    EitWaveguide wg = eit_waveguide_symmetric();
    EitScatter out;
    if (eit_chain_scatter(chain, &wg, 1.0, &out) != EIT_STATUS_OK) return 2;
    if (fabs(out.transmission - 1.0) > 1e-12) return 3;

    EitWaveguide chiral = eit_waveguide_chiral();
    if (eit_chain_scatter(chain, &chiral, 1.0, &out) != EIT_STATUS_INVALID_REGIME) return 4;
    if (strlen(eit_last_error_message()) == 0) return 5;

    eit_chain_free(chain);
    printf("eitchain %s ok\n", eit_version());
    return 0;
}
