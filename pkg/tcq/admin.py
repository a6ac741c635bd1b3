from django.contrib import admin
from .models import BenchmarkRun, RDResult


class RDResultInline(admin.TabularInline):
    model = RDResult
    extra = 0
    readonly_fields = [
        'quantizer', 'rate_bits', 'bits_per_symbol', 'header_overhead_bits',
        'mse', 'snr_db', 'psnr_db', 'entropy_bpp', 'elapsed_ms'
    ]


@admin.register(BenchmarkRun)
class BenchmarkRunAdmin(admin.ModelAdmin):
    list_display = ['run_id', 'source_kind', 'seed', 'samples', 'seqlen', 'trellis', 'status', 'started_at']
    list_filter = ['status', 'source_kind', 'trellis']
    inlines = [RDResultInline]


@admin.register(RDResult)
class RDResultAdmin(admin.ModelAdmin):
    list_display = ['run', 'quantizer', 'rate_bits', 'snr_db', 'psnr_db', 'mse', 'entropy_bpp']
    list_filter = ['quantizer', 'rate_bits']

    actions = ['export_as_csv']

    def export_as_csv(self, request, queryset):
        """Export selected results in the rd_sweep CSV layout"""
        from django.http import HttpResponse
        from tcq.benchmark import results_to_frame

        response = HttpResponse(content_type='text/csv')
        response['Content-Disposition'] = 'attachment; filename="rd_results.csv"'
        results_to_frame(queryset).to_csv(response, index=False)
        return response

    export_as_csv.short_description = 'Export selected results to CSV'
