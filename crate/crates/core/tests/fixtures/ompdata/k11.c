#include <stdio.h>

void kernel_11(double *a, double *b, double *c, int n, int m)
{
    int i, j;
    double s = 0.0, t = 0.0, mx = 0.0, off = 1.0, last = 0.0;

    #pragma omp parallel for private(t) reduction(max:mx)
    for (int i = 0; i < n; i++) { /* pos-022 */
        t = a[i] * a[i];
        mx = t > mx ? t : mx;
    }

    for (int k = 0; k < n; k++) { /* neg-022 */
        a[k] = a[k - 1] + b[k];
    }

    #pragma omp parallel for firstprivate(off) lastprivate(last)
    for (int i = 0; i < n; i++) { /* pos-023 */
        last = a[i] + off;
        b[i] = last;
    }

    while (n > 0) {
        n--;
    }

    #pragma omp target teams distribute parallel for map(to: b[0:n]) map(from: a[0:n])
    for (int i = 0; i < n; i++) { /* pos-024 */
        a[i] = b[i] * b[i];
    }
    c[0] = s + t + mx + last;
}
