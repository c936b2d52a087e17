#include <stdio.h>

void kernel_29(double *a, double *b, double *c, int n, int m)
{
    int i, j;
    double s = 0.0, t = 0.0, mx = 0.0, off = 1.0, last = 0.0;

    #pragma omp target teams distribute parallel for simd reduction(+:s)
    for (int i = 0; i < n; i++) { /* pos-059 */
        s += a[i] * b[i];
    }

    #pragma omp parallel for schedule(static, 4)
    for (int i = 0; i < n; i++) { /* pos-060 */
        b[i] = a[i] / 3.0;
    }

    for (i = 0; i < n; i++) { /* neg-056 */
        for (j = 0; j < m; j++) { /* neg-057 */
            c[i * m + j] = a[i] * b[j];
        }
    }

    #pragma omp parallel for private(j)
    for (i = 0; i < n; i++) { /* pos-061 */
        for (j = 0; j < m; j++)
            c[i * m + j] = 0.0;
    }

    for (i = 0; i < n; i++) { /* neg-058 */
        for (j = 0; j < m; j++) { /* neg-059 */
            c[i * m + j] = a[i] * b[j];
        }
    }
    c[0] = s + t + mx + last;
}
